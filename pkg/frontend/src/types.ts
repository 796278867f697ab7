/** Wire types for the sampling service API. */

export type CheckStatus = 'Untouched' | 'Partial' | 'Completed';
export type MarkerStatus = CheckStatus | 'NoTask';

export interface TaskView {
  task_id: string;
  point_id: string;
  zone_id: string;
  method_id: string;
  date: string;
  status: CheckStatus;
  execution_time: string | null;
  assigned_role: string;
  version: number;
  checked_steps: string[];
  key_steps: string[];
}

export interface WorksheetView {
  date: string;
  round: { round_id: string; current_phase: string } | null;
  tasks: TaskView[];
}

export interface PointDetail {
  point_id: string;
  zone_id: string;
  coords: [number, number];
  water_type: string;
  mechanical_notes: string;
  media_refs: string[];
  facts: { predicate: string; object: string }[];
  feedback: Record<string, FeedbackView[]>;
}

export interface FeedbackView {
  feedback_id: string;
  author: string;
  target: string;
  text: string;
  category: string;
  created_at: string;
}

export interface MapMarker {
  point_id: string;
  coords: [number, number];
  status: MarkerStatus;
  task_ids: string[];
}

export interface ZoneMap {
  zone_id: string;
  name: string;
  floor_plan_ref: string;
  date: string;
  markers: MapMarker[];
}

export interface ProgressView {
  date: string;
  as_of: string;
  total: number;
  by_status: Record<CheckStatus, number>;
  completion_rate: number;
  by_zone: Record<string, number>;
}

export interface RouteLeg {
  task_id: string;
  point_id: string;
  cost: number;
}

export interface RoutePlanView {
  cluster: number;
  start_point: string;
  total_cost: number;
  legs: RouteLeg[];
}

export interface SyncStatus {
  connected: boolean;
  last_sync: string | null;
}

export interface WorksheetFilters {
  zone?: string;
  method?: string;
  point?: string;
  status?: string;
  sort?: string;
}
