// Thin typed client over the review API. No caching, no reshaping: callers
// get the server payload as-is so the DOM stays traceable to response fields.

import type {
  DocSummary,
  EventRecord,
  QueuePayload,
  ReviewResponse,
  VariantPayload,
  VolatilityPayload,
} from './types';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: unknown,
  ) {
    super(`API error ${status}`);
  }
}

export class ApiClient {
  constructor(private readonly baseUrl: string = '') {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(this.baseUrl + path);
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, body);
    }
    return body as T;
  }

  listDocs(): Promise<DocSummary[]> {
    return this.get('/api/docs');
  }

  docEvents(docId: string): Promise<EventRecord[]> {
    return this.get(`/api/docs/${encodeURIComponent(docId)}/events`);
  }

  variant(docId: string, policy: string): Promise<VariantPayload> {
    return this.get(
      `/api/docs/${encodeURIComponent(docId)}/variants/${encodeURIComponent(policy)}`,
    );
  }

  queue(limit: number): Promise<QueuePayload> {
    return this.get(`/api/queue?limit=${limit}`);
  }

  volatility(policyA: string, policyB: string): Promise<VolatilityPayload> {
    return this.get(
      `/api/volatility?policy_a=${encodeURIComponent(policyA)}&policy_b=${encodeURIComponent(policyB)}`,
    );
  }

  async review(
    eventId: string,
    reviewStatus: 'approved' | 'rejected',
    reviewerId: string,
  ): Promise<ReviewResponse> {
    const response = await fetch(
      `${this.baseUrl}/api/events/${encodeURIComponent(eventId)}/review`,
      {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ review_status: reviewStatus, reviewer_id: reviewerId }),
      },
    );
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, body);
    }
    return body as ReviewResponse;
  }
}
