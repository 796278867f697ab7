/**
 * Worksheet table: the live daily task list.
 *
 * Filtering and sorting are delegated to the server; the rendered rows are
 * exactly the task set the API returned, never a client-side re-derivation.
 */

import { ApiClient } from './api.js';
import { clear, el } from './dom.js';
import { strings } from './strings.js';
import type { TaskView, WorksheetFilters, WorksheetView } from './types.js';

export const COLUMNS: { key: string; label: string; sort: string }[] = [
  { key: 'zone_id', label: 'Sampling Zone', sort: 'zone' },
  { key: 'method_id', label: 'Sampling Method', sort: 'method' },
  { key: 'point_id', label: 'Sampling Point', sort: 'point' },
  { key: 'date', label: 'Sampling Execution Date', sort: 'date' },
  { key: 'status', label: 'Check Status', sort: 'status' },
];

export interface WorksheetHandlers {
  onTaskClick?: (task: TaskView) => void;
  onSort?: (column: string) => void;
}

export async function fetchWorksheet(
  client: ApiClient,
  date: string,
  filters: WorksheetFilters,
): Promise<WorksheetView> {
  return client.worksheet(date, filters);
}

export function renderWorksheetTable(
  container: HTMLElement,
  view: WorksheetView,
  handlers: WorksheetHandlers = {},
): void {
  clear(container);
  if (view.tasks.length === 0) {
    container.append(el('p', { class: 'empty-state' }, [strings().emptyWorksheet(view.date)]));
    return;
  }
  const head = el('tr', {}, []);
  for (const column of COLUMNS) {
    const th = el('th', { 'data-sort': column.sort }, [column.label]);
    th.addEventListener('click', () => handlers.onSort?.(column.sort));
    head.append(th);
  }
  const body = el('tbody', {}, []);
  for (const task of view.tasks) {
    const row = el('tr', { class: 'task-row', 'data-task-id': task.task_id }, [
      el('td', {}, [task.zone_id]),
      el('td', {}, [task.method_id]),
      el('td', {}, [task.point_id]),
      el('td', {}, [task.date]),
      el('td', {}, [statusChip(task.status)]),
    ]);
    row.addEventListener('click', () => handlers.onTaskClick?.(task));
    body.append(row);
  }
  container.append(el('table', { class: 'worksheet' }, [el('thead', {}, [head]), body]));
}

export function statusChip(status: string): HTMLElement {
  return el('span', { class: `chip chip-${status.toLowerCase()}` }, [status]);
}

export function renderedTaskIds(container: HTMLElement): string[] {
  return Array.from(container.querySelectorAll<HTMLElement>('.task-row')).map(
    (row) => row.dataset.taskId ?? '',
  );
}
