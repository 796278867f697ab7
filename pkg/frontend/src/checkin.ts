/**
 * Check-in panel: one checkbox per method key step.
 *
 * Submitting posts the checked items with the task version we loaded. A
 * Conflict answer never overwrites silently: the user's selections are
 * kept, a refresh prompt is shown, and only an explicit confirmation
 * refetches the task and retries against the new version.
 */

import { ApiClient, ApiError } from './api.js';
import { clear, el } from './dom.js';
import { strings } from './strings.js';
import { statusChip } from './worksheet.js';
import type { TaskView } from './types.js';

export type PanelPhase = 'idle' | 'submitting' | 'conflict' | 'done' | 'error';

export interface PanelState {
  task: TaskView;
  /** steps ticked in the UI but not yet confirmed by the server */
  selected: Set<string>;
  phase: PanelPhase;
  message: string;
}

export function createPanel(task: TaskView): PanelState {
  return { task, selected: new Set(), phase: 'idle', message: '' };
}

export function toggleStep(state: PanelState, step: string): void {
  if (state.task.checked_steps.includes(step)) return; // already confirmed
  if (state.selected.has(step)) state.selected.delete(step);
  else state.selected.add(step);
}

export function canSubmit(state: PanelState, role: string): boolean {
  return (
    role === 'Technician' &&
    state.selected.size > 0 &&
    state.task.status !== 'Completed' &&
    state.phase !== 'submitting'
  );
}

export async function submitCheckIn(
  state: PanelState,
  client: ApiClient,
  actor: string,
  timestamp: string = new Date().toISOString().replace(/\.\d+Z$/, 'Z'),
): Promise<PanelState> {
  state.phase = 'submitting';
  try {
    const updated = await client.checkIn(state.task.task_id, {
      actor,
      timestamp,
      completed_items: Array.from(state.selected).sort(),
      expected_version: state.task.version,
    });
    return { task: updated, selected: new Set(), phase: 'done', message: '' };
  } catch (err) {
    if (err instanceof ApiError && err.code === 'Conflict') {
      // keep the selections; the user decides whether to refresh and retry
      state.phase = 'conflict';
      state.message = strings().remediation.Conflict;
      return state;
    }
    state.phase = 'error';
    state.message =
      err instanceof ApiError
        ? strings().remediation[err.code] ?? `${err.code}: ${err.message}`
        : String(err);
    return state;
  }
}

/** Explicit user confirmation after a conflict: refetch, drop already-confirmed steps, retry. */
export async function confirmRefreshAndRetry(
  state: PanelState,
  client: ApiClient,
  actor: string,
  timestamp?: string,
): Promise<PanelState> {
  const fresh = await client.task(state.task.task_id);
  const keep = new Set(
    Array.from(state.selected).filter((step) => !fresh.checked_steps.includes(step)),
  );
  const next: PanelState = { task: fresh, selected: keep, phase: 'idle', message: '' };
  if (keep.size === 0) {
    next.phase = 'done';
    return next;
  }
  return submitCheckIn(next, client, actor, timestamp);
}

export interface PanelHandlers {
  onSubmit?: () => void;
  onConfirmRefresh?: () => void;
}

export function renderPanel(
  container: HTMLElement,
  state: PanelState,
  role: string,
  handlers: PanelHandlers = {},
): void {
  clear(container);
  const panel = el('div', { class: 'checkin-panel' });
  panel.append(
    el('h3', {}, [`${state.task.point_id} / ${state.task.method_id}`]),
    el('div', { class: 'task-status' }, [statusChip(state.task.status)]),
  );
  if (state.task.execution_time) {
    panel.append(el('p', { class: 'execution-time' }, [`Executed ${state.task.execution_time}`]));
  }
  const list = el('ul', { class: 'step-list' });
  for (const step of state.task.key_steps) {
    const confirmed = state.task.checked_steps.includes(step);
    const box = el('input', { type: 'checkbox', 'data-step': step }) as HTMLInputElement;
    box.checked = confirmed || state.selected.has(step);
    box.disabled = confirmed || state.task.status === 'Completed';
    box.addEventListener('change', () => toggleStep(state, step));
    list.append(el('li', {}, [el('label', {}, [box, ` ${step}`])]));
  }
  panel.append(list);

  const submit = el('button', { class: 'submit-checkin' }, [
    strings().checkInButton,
  ]) as HTMLButtonElement;
  submit.disabled = !canSubmit(state, role);
  if (role !== 'Technician') {
    panel.append(el('p', { class: 'role-note' }, [strings().remediation.UnauthorizedRole]));
  }
  submit.addEventListener('click', () => handlers.onSubmit?.());
  panel.append(submit);

  if (state.phase === 'conflict') {
    const prompt = el('div', { class: 'conflict-prompt', role: 'alertdialog' }, [
      el('p', {}, [state.message]),
    ]);
    const refresh = el('button', { class: 'confirm-refresh' }, [strings().refreshAndRetry]);
    refresh.addEventListener('click', () => handlers.onConfirmRefresh?.());
    prompt.append(refresh);
    panel.append(prompt);
  } else if (state.phase === 'error' && state.message) {
    panel.append(el('p', { class: 'error-note' }, [state.message]));
  }
  container.append(panel);
}
