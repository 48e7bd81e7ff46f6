// Pure render functions: payload in, DOM out. Kept free of fetch calls so
// tests can assert rendered numbers against recorded API payloads directly.

import type { QueueItem, VolatilityPayload } from './types';

const SIGNAL_LABELS: Record<string, string> = {
  low_confidence: 'low-conf',
  split_merge: 'split/merge',
  non_body_zone: 'non-body',
  unreviewed: 'unreviewed',
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderQueue(
  container: HTMLElement,
  items: QueueItem[],
  selectedEventId: string | null,
): void {
  container.textContent = '';
  if (items.length === 0) {
    container.appendChild(el('p', 'empty-state', 'Queue is empty. Nothing needs review.'));
    return;
  }
  const list = el('ul', 'queue-list');
  for (const item of items) {
    const row = el('li', 'queue-item');
    row.dataset.eventId = item.event_id;
    if (item.event_id === selectedEventId) row.classList.add('selected');

    const head = el('div', 'queue-head');
    head.appendChild(el('span', 'queue-doc', item.doc_id));
    head.appendChild(el('span', 'queue-priority', item.priority.toFixed(3)));
    head.appendChild(el('span', `status status-${item.review_status}`, item.review_status));
    row.appendChild(head);

    const badges = el('div', 'badges');
    for (const [signal, active] of Object.entries(item.signals)) {
      if (!active) continue;
      const badge = el('span', `badge badge-${signal}`, SIGNAL_LABELS[signal] ?? signal);
      badges.appendChild(badge);
    }
    if (item.event.confidence !== undefined) {
      badges.appendChild(el('span', 'badge badge-conf', `conf ${item.event.confidence}`));
    }
    row.appendChild(badges);
    row.appendChild(el('div', 'queue-edit', `${item.event.orig_text} → ${item.event.new_text}`));
    list.appendChild(row);
  }
  container.appendChild(list);
}

export function renderEventDetail(container: HTMLElement, item: QueueItem | null): void {
  container.textContent = '';
  if (!item) {
    container.appendChild(el('p', 'empty-state', 'Select a queue item.'));
    return;
  }
  const event = item.event;
  container.appendChild(el('h3', undefined, `${event.event_id} (${event.edit_type}, ${event.source})`));

  // base context with orig_text highlighted at its recorded span
  const highlightStart = event.span_start - item.context_offset;
  const highlightEnd = event.span_end - item.context_offset;
  const base = el('div', 'pane pane-base');
  base.appendChild(el('h4', undefined, 'Base'));
  const baseText = el('pre', 'context');
  baseText.appendChild(document.createTextNode(item.context.slice(0, highlightStart)));
  baseText.appendChild(el('mark', 'orig', item.context.slice(highlightStart, highlightEnd)));
  baseText.appendChild(document.createTextNode(item.context.slice(highlightEnd)));
  base.appendChild(baseText);

  const variant = el('div', 'pane pane-variant');
  variant.appendChild(el('h4', undefined, 'With this edit'));
  const variantText = el('pre', 'context');
  variantText.appendChild(document.createTextNode(item.context.slice(0, highlightStart)));
  variantText.appendChild(el('mark', 'new', event.new_text));
  variantText.appendChild(document.createTextNode(item.context.slice(highlightEnd)));
  variant.appendChild(variantText);

  const panes = el('div', 'panes');
  panes.appendChild(base);
  panes.appendChild(variant);
  container.appendChild(panes);

  const meta = el('dl', 'meta');
  const facts: Array<[string, string]> = [
    ['doc', event.doc_id],
    ['span', `[${event.span_start}, ${event.span_end})`],
    ['zone', event.layout_zone ?? '(none)'],
    ['confidence', event.confidence === undefined ? '(none)' : String(event.confidence)],
    ['status', item.review_status],
  ];
  if (event.note) facts.push(['note', event.note]);
  for (const [term, value] of facts) {
    meta.appendChild(el('dt', undefined, term));
    meta.appendChild(el('dd', undefined, value));
  }
  container.appendChild(meta);
}

export function renderVolatility(
  container: HTMLElement,
  payload: VolatilityPayload,
): void {
  container.textContent = '';
  const nameA = payload.policy_a.name;
  const nameB = payload.policy_b.name;
  container.appendChild(el('h3', undefined, `Volatility: ${nameA} vs ${nameB}`));
  const table = el('table', 'volatility-table');
  const rows: Array<[string, string, number | string]> = [
    ['mentions-a', `Mentions (${nameA})`, payload.mentions_a],
    ['mentions-b', `Mentions (${nameB})`, payload.mentions_b],
    ['unique-a', `Unique surfaces (${nameA})`, payload.unique_a],
    ['unique-b', `Unique surfaces (${nameB})`, payload.unique_b],
    ['jaccard', 'Jaccard overlap', payload.jaccard],
    ['volatile', 'Volatile entities', payload.volatile],
    ['added', 'Added', payload.kinds.added],
    ['removed', 'Removed', payload.kinds.removed],
    ['surface', 'Surface changed', payload.kinds.surface_changed],
    ['boundary', 'Boundary changed', payload.kinds.boundary_changed],
    ['pct-unreviewed', '% linked to unreviewed edits', payload.pct_unreviewed],
  ];
  for (const [key, label, value] of rows) {
    const tr = el('tr');
    tr.appendChild(el('td', 'metric-label', label));
    const cell = el('td', 'metric-value', String(value));
    cell.dataset.metric = key;
    tr.appendChild(cell);
    table.appendChild(tr);
  }
  container.appendChild(table);
}

export function renderVolatilityError(container: HTMLElement, detail: string): void {
  container.textContent = '';
  const banner = el('div', 'banner banner-error');
  banner.appendChild(el('strong', undefined, 'Mentions unavailable. '));
  banner.appendChild(document.createTextNode(detail));
  container.appendChild(banner);
}
