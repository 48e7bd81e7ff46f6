// Payload shapes mirrored from the review API. The UI never derives numbers
// itself; every rendered value comes from one of these fields.

export interface EventRecord {
  schema_version: string;
  event_id: string;
  doc_id: string;
  page_id: number | string;
  base_revision: number;
  span_start: number;
  span_end: number;
  orig_text: string;
  new_text: string;
  edit_type: string;
  source: string;
  confidence?: number;
  review_status?: string;
  reviewer_id?: string;
  layout_zone?: string;
  note?: string;
  [extra: string]: unknown;
}

export interface DocSummary {
  doc_id: string;
  page_id: number | string;
  text_length: number;
  events: number;
}

export interface QueueItem {
  event_id: string;
  doc_id: string;
  context: string;
  context_offset: number;
  event: EventRecord;
  priority: number;
  review_status: string;
  signals: Record<string, boolean>;
}

export interface QueuePayload {
  items: QueueItem[];
}

export interface TraceEntry {
  event_id: string;
  outcome: string;
  lost_to?: string | null;
}

export interface VariantPayload {
  variant_id: string;
  doc_id: string;
  policy: string;
  text: string;
  trace: { entries: TraceEntry[]; [k: string]: unknown };
}

export interface PolicyDescriptor {
  name: string;
  min_confidence: number | null;
  require_approved: boolean;
  allowed_sources: string[] | null;
  exclude_rejected: boolean;
}

export interface VolatilityPayload {
  policy_a: PolicyDescriptor;
  policy_b: PolicyDescriptor;
  mentions_a: number;
  mentions_b: number;
  unique_a: number;
  unique_b: number;
  jaccard: number;
  volatile: number;
  kinds: {
    added: number;
    removed: number;
    surface_changed: number;
    boundary_changed: number;
  };
  pct_unreviewed: number | string;
  [k: string]: unknown;
}

export interface ReviewResponse {
  decision: {
    event_id: string;
    review_status: string;
    reviewer_id: string;
    timestamp: string;
  };
  event: EventRecord;
}

export interface ApiError {
  status: number;
  body: unknown;
}
