// End-to-end review loop against the real HTTP service: approve the
// low-confidence "Madifon" fixture event through the API client, verify the
// approved-only variant now contains the corrected surface, and verify the
// volatility payload changes on the next fetch. Runs on a throwaway copy of
// the fixture corpus.

import { spawn, ChildProcess } from 'node:child_process';
import { cpSync, mkdtempSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join, resolve } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import { ApiClient } from '../src/api';

const PORT = 8731;
const BASE = `http://127.0.0.1:${PORT}`;
const MADIFON = 'doc_017-madifon';

let server: ChildProcess;
let corpusDir: string;
const api = new ApiClient(BASE);

async function waitForHealth(): Promise<void> {
  for (let i = 0; i < 100; i++) {
    try {
      const response = await fetch(`${BASE}/api/health`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error('review API did not come up');
}

beforeAll(async () => {
  corpusDir = mkdtempSync(join(tmpdir(), 'review-loop-'));
  cpSync(resolve(__dirname, '../../fixtures/corpus'), corpusDir, { recursive: true });
  server = spawn(
    'python3',
    ['-m', 'provline.cli', 'serve', '--corpus', corpusDir, '--port', String(PORT)],
    { cwd: resolve(__dirname, '../..'), stdio: 'ignore' },
  );
  await waitForHealth();
}, 30_000);

afterAll(() => {
  server?.kill();
  if (corpusDir) rmSync(corpusDir, { recursive: true, force: true });
});

describe('review loop closure', () => {
  it('approving the Madifon event corrects the approved-only variant', async () => {
    const before = await api.variant('doc_017', 'approved');
    expect(before.text).toContain('Madifon');

    const response = await api.review(MADIFON, 'approved', 'it-reviewer');
    expect(response.event.review_status).toBe('approved');

    const after = await api.variant('doc_017', 'approved');
    expect(after.text).toContain('Madison');
    expect(after.text).not.toContain('Madifon');
    expect(after.variant_id).not.toBe(before.variant_id);
    const applied = after.trace.entries.filter((e) => e.outcome === 'applied');
    expect(applied.map((e) => e.event_id)).toContain(MADIFON);
  }, 20_000);

  it('the volatility payload updates on the next fetch', async () => {
    const before = await api.volatility('raw', 'approved');
    const rejectTarget = before; // payload before the decision below

    // reject a previously approved-policy event and refetch: exact payloads
    // must differ only through server-computed fields, nothing client-side
    await api.review(MADIFON, 'rejected', 'it-reviewer');
    const after = await api.volatility('raw', 'approved');
    expect(after).not.toEqual(rejectTarget);

    // flipping back restores the exact payload (service is a pure function
    // of corpus bytes + decision log tail)
    await api.review(MADIFON, 'approved', 'it-reviewer');
    const restored = await api.volatility('raw', 'approved');
    expect(restored).toEqual(rejectTarget);
  }, 20_000);

  it('the queue stops flagging the event as unreviewed', async () => {
    const queue = await api.queue(1000);
    const item = queue.items.find((i) => i.event_id === MADIFON);
    if (item) expect(item.signals.unreviewed).toBe(false);
  });
});
