import { ApiClient } from './api';
import { ReviewSession } from './session';
import {
  renderEventDetail,
  renderQueue,
  renderVolatility,
  renderVolatilityError,
} from './render';

const api = new ApiClient();
const session = new ReviewSession(api);

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function paint(): void {
  renderQueue(byId('queue'), session.items, session.selected?.event_id ?? null);
  renderEventDetail(byId('detail'), session.selected);
  const panel = byId('volatility');
  if (session.volatilityError !== null) {
    renderVolatilityError(panel, session.volatilityError);
  } else if (session.volatility) {
    renderVolatility(panel, session.volatility);
  }
  const errorBar = byId('decision-error');
  errorBar.textContent = session.decisionError ?? '';
  errorBar.hidden = session.decisionError === null;
}

async function decide(status: 'approved' | 'rejected'): Promise<void> {
  paint(); // show the optimistic state immediately
  await session.decide(status);
  paint();
}

function bindKeys(): void {
  document.addEventListener('keydown', (event) => {
    if (event.target instanceof HTMLInputElement) return;
    switch (event.key) {
      case 'j':
        session.next();
        paint();
        break;
      case 'k':
        session.previous();
        paint();
        break;
      case 'a':
        void decide('approved');
        break;
      case 'r':
        void decide('rejected');
        break;
    }
  });
}

function bindPolicyPicker(): void {
  const a = byId('policy-a') as HTMLSelectElement;
  const b = byId('policy-b') as HTMLSelectElement;
  const apply = async () => {
    session.policyA = a.value;
    session.policyB = b.value;
    await session.refreshVolatility();
    paint();
  };
  a.addEventListener('change', () => void apply());
  b.addEventListener('change', () => void apply());
}

function bindQueueClicks(): void {
  byId('queue').addEventListener('click', (event) => {
    const row = (event.target as HTMLElement).closest('li.queue-item');
    if (!(row instanceof HTMLElement) || !row.dataset.eventId) return;
    const index = session.items.findIndex((i) => i.event_id === row.dataset.eventId);
    if (index >= 0) {
      session.cursor = index;
      paint();
    }
  });
  byId('approve-button').addEventListener('click', () => void decide('approved'));
  byId('reject-button').addEventListener('click', () => void decide('rejected'));
}

async function start(): Promise<void> {
  bindKeys();
  bindPolicyPicker();
  bindQueueClicks();
  await session.refreshQueue();
  await session.refreshVolatility();
  paint();
}

void start();
