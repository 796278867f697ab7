// @vitest-environment happy-dom
import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { fetchWorksheet, renderWorksheetTable, renderedTaskIds } from '../src/worksheet.js';
import { Call, fakeFetch, ok, task, worksheet } from './helpers.js';

const ALL = [
  task(),
  task({ task_id: 'P-102-M-STD-2024-03-05', point_id: 'P-102' }),
  task({ task_id: 'P-201-M-STD-2024-03-05', point_id: 'P-201', zone_id: 'Z-B' }),
];

function clientWith(calls: Call[]): ApiClient {
  return new ApiClient(
    fakeFetch(
      [
        {
          match: (url) => url.includes('/api/worksheets/'),
          respond: (url) => {
            const params = new URL(url, 'http://x').searchParams;
            const zone = params.get('zone');
            const filtered = zone ? ALL.filter((t) => t.zone_id === zone) : ALL;
            return ok(worksheet(filtered));
          },
        },
      ],
      calls,
    ),
  );
}

describe('worksheet view', () => {
  it('renders every task the API returns', async () => {
    const container = document.createElement('div');
    const view = await fetchWorksheet(clientWith([]), '2024-03-05', {});
    renderWorksheetTable(container, view);
    expect(renderedTaskIds(container)).toEqual(ALL.map((t) => t.task_id));
  });

  it('zone filter reduces the rendered rows to the API-filtered set', async () => {
    const calls: Call[] = [];
    const client = clientWith(calls);
    const container = document.createElement('div');
    const view = await fetchWorksheet(client, '2024-03-05', { zone: 'Z-A' });
    renderWorksheetTable(container, view);

    // the filter went over the wire, no client-side re-derivation
    expect(calls[0].url).toContain('zone=Z-A');
    const expected = ALL.filter((t) => t.zone_id === 'Z-A').map((t) => t.task_id);
    expect(renderedTaskIds(container)).toEqual(expected);
    expect(renderedTaskIds(container)).toHaveLength(2);
  });

  it('status chips are colored by status class', async () => {
    const container = document.createElement('div');
    renderWorksheetTable(
      container,
      worksheet([task({ status: 'Completed', execution_time: '2024-03-05T08:00:00Z' })]),
    );
    const chip = container.querySelector('.chip');
    expect(chip?.classList.contains('chip-completed')).toBe(true);
    expect(chip?.textContent).toBe('Completed');
  });

  it('row click navigates via handler', async () => {
    const container = document.createElement('div');
    const clicked: string[] = [];
    renderWorksheetTable(container, worksheet(ALL), {
      onTaskClick: (t) => clicked.push(t.task_id),
    });
    (container.querySelector('.task-row') as HTMLElement).click();
    expect(clicked).toEqual([ALL[0].task_id]);
  });

  it('empty worksheet shows the empty state', () => {
    const container = document.createElement('div');
    renderWorksheetTable(container, worksheet([]));
    expect(container.querySelector('.empty-state')?.textContent).toContain('2024-03-05');
  });

  it('sort clicks delegate the sort column to the server', async () => {
    const calls: Call[] = [];
    const client = clientWith(calls);
    await fetchWorksheet(client, '2024-03-05', { sort: 'point' });
    expect(calls[0].url).toContain('sort=point');
  });
});
