/** Client view state: selected date, filters, map viewport. */

import type { WorksheetFilters } from './types.js';

export const ZOOM_MIN = 1;
export const ZOOM_MAX = 8;

export interface MapViewport {
  /** zoom factor, clamped to the configured bounds */
  zoom: number;
  /** view center in normalized floor-plan coordinates */
  center: [number, number];
}

export interface ViewState {
  date: string;
  filters: WorksheetFilters;
  selectedTask: string | null;
  selectedPoint: string | null;
  viewport: MapViewport;
}

export function todayIso(): string {
  return new Date().toISOString().slice(0, 10);
}

export function initialState(date = todayIso()): ViewState {
  return {
    date,
    filters: {},
    selectedTask: null,
    selectedPoint: null,
    viewport: { zoom: 2, center: [0.5, 0.5] },
  };
}

export function clampZoom(zoom: number): number {
  return Math.min(ZOOM_MAX, Math.max(ZOOM_MIN, zoom));
}

/** Change only the zoom factor; the center stays where it is. */
export function zoomTo(viewport: MapViewport, zoom: number): MapViewport {
  return { zoom: clampZoom(zoom), center: viewport.center };
}

export function centerOn(viewport: MapViewport, center: [number, number]): MapViewport {
  return { zoom: viewport.zoom, center };
}
