/** Shared test scaffolding: fake fetch backed by canned envelopes. */

import type { FetchFn } from '../src/api.js';
import type { TaskView, WorksheetView } from '../src/types.js';

export function task(overrides: Partial<TaskView> = {}): TaskView {
  return {
    task_id: 'P-101-M-STD-2024-03-05',
    point_id: 'P-101',
    zone_id: 'Z-A',
    method_id: 'M-STD',
    date: '2024-03-05',
    status: 'Untouched',
    execution_time: null,
    assigned_role: 'Technician',
    version: 0,
    checked_steps: [],
    key_steps: ['flush outlet', 'fill bottle', 'seal and label'],
    ...overrides,
  };
}

export function worksheet(tasks: TaskView[], date = '2024-03-05'): WorksheetView {
  return { date, round: { round_id: `R-${date}`, current_phase: 'FieldSampling' }, tasks };
}

export interface Call {
  url: string;
  init?: RequestInit;
}

export interface FakeRoute {
  match: (url: string, init?: RequestInit) => boolean;
  respond: (url: string, init?: RequestInit) => { status?: number; body: unknown };
}

export function fakeFetch(routes: FakeRoute[], calls: Call[] = []): FetchFn {
  return async (url, init) => {
    calls.push({ url, init });
    for (const route of routes) {
      if (route.match(url, init)) {
        const { status = 200, body } = route.respond(url, init);
        return new Response(JSON.stringify(body), {
          status,
          headers: { 'content-type': 'application/json' },
        });
      }
    }
    return new Response(
      JSON.stringify({ error: { code: 'NotFound', message: `no fake route for ${url}` } }),
      { status: 404, headers: { 'content-type': 'application/json' } },
    );
  };
}

export function ok(payload: unknown, version?: number) {
  return { body: version === undefined ? { payload } : { payload, version } };
}

export function err(code: string, message: string, status: number) {
  return { status, body: { error: { code, message } } };
}
