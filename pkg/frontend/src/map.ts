/**
 * Interactive zone map: floor-plan background with task markers.
 *
 * Markers live in normalized [0,1]^2 floor-plan coordinates. The zoom
 * slider rescales around the current view center, so whatever sits at the
 * center stays put; a missing floor-plan image degrades to a placeholder
 * grid with the markers still positioned.
 */

import { clear, el } from './dom.js';
import type { MapViewport } from './state.js';
import type { MapMarker, MarkerStatus, ZoneMap } from './types.js';

export interface ScreenPos {
  x: number;
  y: number;
}

/** Normalized coords -> pixel position for the given viewport and canvas size. */
export function projectMarker(
  coords: [number, number],
  viewport: MapViewport,
  sizePx: number,
): ScreenPos {
  const [cx, cy] = viewport.center;
  return {
    x: sizePx / 2 + (coords[0] - cx) * viewport.zoom * sizePx,
    y: sizePx / 2 + (coords[1] - cy) * viewport.zoom * sizePx,
  };
}

export function markerVisible(pos: ScreenPos, sizePx: number): boolean {
  return pos.x >= 0 && pos.x <= sizePx && pos.y >= 0 && pos.y <= sizePx;
}

export interface MapHandlers {
  onMarkerClick?: (marker: MapMarker) => void;
  onMediaClick?: (pointId: string) => void;
}

export interface MapRenderOptions {
  sizePx?: number;
  /** markers matching this status get the emphasis class */
  statusSearch?: MarkerStatus | null;
  highlight?: string | null;
}

export function renderZoneMap(
  container: HTMLElement,
  zoneMap: ZoneMap,
  viewport: MapViewport,
  handlers: MapHandlers = {},
  options: MapRenderOptions = {},
): void {
  const size = options.sizePx ?? 480;
  clear(container);
  const canvas = el('div', {
    class: 'map-canvas',
    style: `width:${size}px;height:${size}px;position:relative;overflow:hidden;`,
  });
  if (zoneMap.floor_plan_ref) {
    const image = el('img', {
      class: 'floor-plan',
      src: zoneMap.floor_plan_ref,
      alt: `floor plan for ${zoneMap.name}`,
    });
    // fall back to the placeholder grid when the media file is absent
    image.addEventListener('error', () => {
      image.remove();
      canvas.classList.add('placeholder-grid');
    });
    scaleFloorPlan(image, viewport, size);
    canvas.append(image);
  } else {
    canvas.classList.add('placeholder-grid');
  }

  for (const marker of zoneMap.markers) {
    const pos = projectMarker(marker.coords, viewport, size);
    if (!markerVisible(pos, size)) continue;
    const classes = ['marker', `marker-${marker.status.toLowerCase()}`];
    if (options.statusSearch && marker.status === options.statusSearch) {
      classes.push('marker-emphasis');
    }
    if (options.highlight === marker.point_id) classes.push('marker-highlight');
    const node = el(
      'button',
      {
        class: classes.join(' '),
        style: `position:absolute;left:${pos.x}px;top:${pos.y}px;`,
        'data-point-id': marker.point_id,
        'data-status': marker.status,
        title: `${marker.point_id} (${marker.status})`,
      },
      [marker.point_id],
    );
    node.addEventListener('click', () => handlers.onMarkerClick?.(marker));
    const camera = el('span', { class: 'camera-icon', 'data-point-id': marker.point_id }, ['📷']);
    camera.addEventListener('click', (event) => {
      event.stopPropagation();
      handlers.onMediaClick?.(marker.point_id);
    });
    node.append(camera);
    canvas.append(node);
  }
  container.append(canvas);
}

function scaleFloorPlan(image: HTMLImageElement, viewport: MapViewport, size: number): void {
  // the image corners are normalized (0,0) and (1,1): project both
  const origin = projectMarker([0, 0], viewport, size);
  const extent = projectMarker([1, 1], viewport, size);
  image.style.position = 'absolute';
  image.style.left = `${origin.x}px`;
  image.style.top = `${origin.y}px`;
  image.style.width = `${extent.x - origin.x}px`;
  image.style.height = `${extent.y - origin.y}px`;
}
