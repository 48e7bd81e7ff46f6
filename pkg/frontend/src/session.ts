// Client-side review session: queue cursor, the active policy pair, and
// pending (optimistic) decisions. All of it is reconstructable from the API;
// a refresh loses nothing but the cursor position.

import { ApiClient, ApiError } from './api';
import type { QueueItem, VolatilityPayload } from './types';

export interface SessionView {
  items: QueueItem[];
  selected: QueueItem | null;
  volatility: VolatilityPayload | null;
  volatilityError: string | null;
  decisionError: string | null;
}

export class ReviewSession {
  items: QueueItem[] = [];
  cursor = 0;
  policyA = 'raw';
  policyB = 'all';
  volatility: VolatilityPayload | null = null;
  volatilityError: string | null = null;
  decisionError: string | null = null;
  reviewerId = 'reviewer';

  constructor(
    private readonly api: ApiClient,
    private readonly queueLimit = 50,
  ) {}

  get selected(): QueueItem | null {
    return this.items[this.cursor] ?? null;
  }

  view(): SessionView {
    return {
      items: this.items,
      selected: this.selected,
      volatility: this.volatility,
      volatilityError: this.volatilityError,
      decisionError: this.decisionError,
    };
  }

  async refreshQueue(): Promise<void> {
    const payload = await this.api.queue(this.queueLimit);
    const previous = this.selected?.event_id;
    this.items = payload.items;
    const kept = previous ? this.items.findIndex((i) => i.event_id === previous) : -1;
    this.cursor = kept >= 0 ? kept : Math.min(this.cursor, Math.max(0, this.items.length - 1));
  }

  async refreshVolatility(): Promise<void> {
    try {
      this.volatility = await this.api.volatility(this.policyA, this.policyB);
      this.volatilityError = null;
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.volatility = null;
        const body = error.body as { detail?: string };
        this.volatilityError = body.detail ?? 'mentions unavailable for this policy pair';
        return;
      }
      throw error;
    }
  }

  next(): void {
    if (this.items.length) this.cursor = (this.cursor + 1) % this.items.length;
  }

  previous(): void {
    if (this.items.length) {
      this.cursor = (this.cursor - 1 + this.items.length) % this.items.length;
    }
  }

  /** Optimistically mark the selected item, reconcile with the server, and
   * roll back on failure so the screen never shows an unconfirmed status. */
  async decide(status: 'approved' | 'rejected'): Promise<void> {
    const item = this.selected;
    if (!item) return;
    const rollback = item.review_status;
    item.review_status = status;
    this.decisionError = null;
    try {
      const response = await this.api.review(item.event_id, status, this.reviewerId);
      item.review_status = response.event.review_status ?? status;
      item.event = response.event;
    } catch (error) {
      item.review_status = rollback;
      this.decisionError =
        error instanceof ApiError
          ? `decision rejected by server (${error.status})`
          : 'network failure; decision not saved, retry';
      return;
    }
    await this.refreshQueue();
    await this.refreshVolatility();
  }
}
