/**
 * Typed client for the sampling service.
 *
 * Every response is an envelope carrying exactly one of `payload` or
 * `error`; errors become ApiError with the service's stable code. The UI
 * never mutates state except through these endpoints.
 */

import type {
  PointDetail,
  ProgressView,
  RoutePlanView,
  SyncStatus,
  TaskView,
  WorksheetFilters,
  WorksheetView,
  ZoneMap,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

export type FetchFn = (input: string, init?: RequestInit) => Promise<Response>;

interface Envelope<T> {
  payload?: T;
  version?: number;
  error?: { code: string; message: string };
}

export interface CheckInRequest {
  actor: string;
  timestamp: string;
  completed_items: string[];
  expected_version: number;
}

export interface FeedbackRequest {
  author: string;
  target: string;
  text: string;
  category: string;
}

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchFn = (input, init) => window.fetch(input, init),
    private readonly base = '',
    public role = 'Technician',
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const headers = { 'X-Role': this.role, ...(init?.headers ?? {}) };
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, { ...init, headers });
    } catch (err) {
      throw new ApiError('Unreachable', String(err), 0);
    }
    let body: Envelope<T>;
    try {
      body = (await response.json()) as Envelope<T>;
    } catch {
      throw new ApiError('BadResponse', `non-JSON response (${response.status})`, response.status);
    }
    if (body.error) {
      throw new ApiError(body.error.code, body.error.message, response.status);
    }
    return body.payload as T;
  }

  worksheet(date: string, filters: WorksheetFilters = {}): Promise<WorksheetView> {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(filters)) {
      if (value) params.set(key, value);
    }
    const query = params.toString();
    return this.request(`/api/worksheets/${date}${query ? '?' + query : ''}`);
  }

  task(taskId: string): Promise<TaskView> {
    return this.request(`/api/tasks/${encodeURIComponent(taskId)}`);
  }

  checkIn(taskId: string, body: CheckInRequest): Promise<TaskView> {
    return this.request(`/api/tasks/${encodeURIComponent(taskId)}/checkin`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  point(pointId: string): Promise<PointDetail> {
    return this.request(`/api/points/${encodeURIComponent(pointId)}`);
  }

  zoneMap(zoneId: string, date?: string): Promise<ZoneMap> {
    const query = date ? `?date=${date}` : '';
    return this.request(`/api/zones/${encodeURIComponent(zoneId)}/map${query}`);
  }

  routes(date: string, start: string, options: { zone?: string; k?: number } = {}): Promise<{
    date: string;
    plans: RoutePlanView[];
  }> {
    const params = new URLSearchParams({ date, start });
    if (options.zone) params.set('zone', options.zone);
    if (options.k) params.set('k', String(options.k));
    return this.request(`/api/routes?${params}`);
  }

  progress(date: string): Promise<ProgressView> {
    return this.request(`/api/progress/${date}`);
  }

  postFeedback(body: FeedbackRequest): Promise<unknown> {
    return this.request('/api/feedback', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  sync(): Promise<SyncStatus> {
    return this.request('/api/sync');
  }
}
