/**
 * Application shell: wires the worksheet, task page, zone map, and
 * dashboard together over hash navigation, with polling for sync state.
 */

import { ApiClient, ApiError } from './api.js';
import { SyncBanner } from './banner.js';
import {
  PanelState,
  confirmRefreshAndRetry,
  createPanel,
  renderPanel,
  submitCheckIn,
} from './checkin.js';
import { clear, el } from './dom.js';
import { renderZoneMap } from './map.js';
import { ViewState, initialState, zoomTo } from './state.js';
import { strings } from './strings.js';
import type { MarkerStatus, TaskView } from './types.js';
import { fetchWorksheet, renderWorksheetTable } from './worksheet.js';

const POLL_INTERVAL_MS = 5000;

export class App {
  state: ViewState = initialState();
  private actor = 'technician';
  private panel: PanelState | null = null;
  private statusSearch: MarkerStatus | null = null;

  constructor(
    private readonly client: ApiClient,
    private readonly root: HTMLElement,
    private readonly banner: SyncBanner,
  ) {}

  start(): void {
    window.addEventListener('hashchange', () => void this.route());
    void this.banner.tick();
    window.setInterval(() => void this.banner.tick(), POLL_INTERVAL_MS);
    void this.route();
  }

  async route(): Promise<void> {
    const hash = window.location.hash || '#/worksheet';
    const [, view, arg] = hash.split('/');
    try {
      if (view === 'task' && arg) await this.showTask(decodeURIComponent(arg));
      else if (view === 'map' && arg) await this.showMap(decodeURIComponent(arg));
      else if (view === 'point' && arg) await this.showPointMedia(decodeURIComponent(arg));
      else if (view === 'dashboard') await this.showDashboard();
      else await this.showWorksheet();
    } catch (err) {
      this.showError(err);
    }
  }

  private nav(): HTMLElement {
    const date = el('input', { type: 'date', value: this.state.date }) as HTMLInputElement;
    date.addEventListener('change', () => {
      this.state.date = date.value;
      void this.route();
    });
    return el('nav', { class: 'topnav' }, [
      el('a', { href: '#/worksheet' }, ['Worksheet']),
      el('a', { href: '#/dashboard' }, ['Progress']),
      date,
    ]);
  }

  private frame(...children: (Node | string)[]): void {
    clear(this.root);
    this.root.append(this.nav(), ...children);
  }

  private showError(err: unknown): void {
    const message =
      err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    const bannerNode = el('div', { class: 'error-banner' }, [message]);
    this.root.prepend(bannerNode);
  }

  async showWorksheet(): Promise<void> {
    const filterBar = el('div', { class: 'filter-bar' });
    const table = el('div', { class: 'worksheet-container' });
    const view = await fetchWorksheet(this.client, this.state.date, this.state.filters);

    const zones = Array.from(new Set(view.tasks.map((t) => t.zone_id))).sort();
    const zoneSelect = el('select', { class: 'filter-zone' }) as HTMLSelectElement;
    zoneSelect.append(el('option', { value: '' }, ['all zones']));
    for (const zone of zones) zoneSelect.append(el('option', { value: zone }, [zone]));
    zoneSelect.value = this.state.filters.zone ?? '';
    zoneSelect.addEventListener('change', () => {
      this.state.filters.zone = zoneSelect.value || undefined;
      void this.showWorksheet();
    });
    filterBar.append('Zone: ', zoneSelect);

    renderWorksheetTable(table, view, {
      onTaskClick: (task: TaskView) => {
        window.location.hash = `#/task/${encodeURIComponent(task.task_id)}`;
      },
      onSort: (column) => {
        this.state.filters.sort = column;
        void this.showWorksheet();
      },
    });
    this.frame(filterBar, table);
  }

  async showTask(taskId: string): Promise<void> {
    this.state.selectedTask = taskId;
    const task = await this.client.task(taskId);
    this.panel = createPanel(task);
    const point = await this.client.point(task.point_id);
    const zoneMap = await this.client.zoneMap(task.zone_id, this.state.date);

    const panelNode = el('div', { class: 'task-panel' });
    const mapNode = el('div', { class: 'task-map' });
    const rerenderPanel = () => {
      renderPanel(panelNode, this.panel as PanelState, this.client.role, {
        onSubmit: () => {
          void submitCheckIn(this.panel as PanelState, this.client, this.actor).then((next) => {
            this.panel = next;
            rerenderPanel();
          });
        },
        onConfirmRefresh: () => {
          void confirmRefreshAndRetry(this.panel as PanelState, this.client, this.actor).then(
            (next) => {
              this.panel = next;
              rerenderPanel();
            },
          );
        },
      });
    };
    rerenderPanel();

    this.state.viewport = { zoom: this.state.viewport.zoom, center: point.coords };
    renderZoneMap(mapNode, zoneMap, this.state.viewport, {}, { highlight: task.point_id });

    const info = el('div', { class: 'point-info' }, [
      el('h4', {}, [`${point.point_id} (${point.water_type})`]),
      el('p', {}, [point.mechanical_notes || strings().noMechanicalNotes]),
      el('p', {}, [
        el('a', { href: `#/point/${encodeURIComponent(point.point_id)}` }, ['📷 media']),
        ' ',
        el('a', { href: `#/map/${encodeURIComponent(task.zone_id)}` }, ['zone map']),
      ]),
    ]);
    this.frame(panelNode, mapNode, info);
  }

  async showMap(zoneId: string): Promise<void> {
    const zoneMap = await this.client.zoneMap(zoneId, this.state.date);
    const mapNode = el('div', { class: 'zone-map' });

    const slider = el('input', {
      type: 'range',
      min: '1',
      max: '8',
      step: '0.5',
      value: String(this.state.viewport.zoom),
      class: 'zoom-slider',
    }) as HTMLInputElement;

    const statusSelect = el('select', { class: 'status-search' }) as HTMLSelectElement;
    for (const option of ['', 'Untouched', 'Partial', 'Completed']) {
      statusSelect.append(el('option', { value: option }, [option || 'any status']));
    }

    const draw = () => {
      renderZoneMap(
        mapNode,
        zoneMap,
        this.state.viewport,
        {
          onMarkerClick: (marker) => {
            if (marker.task_ids.length > 0) {
              window.location.hash = `#/task/${encodeURIComponent(marker.task_ids[0])}`;
            }
          },
          onMediaClick: (pointId) => {
            window.location.hash = `#/point/${encodeURIComponent(pointId)}`;
          },
        },
        { statusSearch: this.statusSearch },
      );
    };
    slider.addEventListener('input', () => {
      this.state.viewport = zoomTo(this.state.viewport, Number(slider.value));
      draw();
    });
    statusSelect.addEventListener('change', () => {
      this.statusSearch = (statusSelect.value || null) as MarkerStatus | null;
      draw();
    });
    draw();
    this.frame(
      el('div', { class: 'map-controls' }, ['Zoom: ', slider, ' Find: ', statusSelect]),
      mapNode,
    );
  }

  async showPointMedia(pointId: string): Promise<void> {
    const point = await this.client.point(pointId);
    const gallery = el('div', { class: 'media-gallery' });
    if (point.media_refs.length === 0) {
      gallery.append(el('p', { class: 'empty-state' }, [strings().noMedia]));
    }
    for (const ref of point.media_refs) {
      const image = el('img', { src: `/${ref}`, alt: `${pointId} scene`, class: 'scene-image' });
      image.addEventListener('error', () => {
        image.replaceWith(el('p', { class: 'empty-state' }, [strings().missingMedia(ref)]));
      });
      gallery.append(image);
    }
    const notes = el('div', { class: 'point-feedback' });
    for (const [category, entries] of Object.entries(point.feedback)) {
      notes.append(el('h4', {}, [category]));
      for (const entry of entries) {
        notes.append(el('p', {}, [`${entry.created_at} ${entry.author}: ${entry.text}`]));
      }
    }
    this.frame(
      el('h2', {}, [`${point.point_id} (${point.water_type})`]),
      el('p', {}, [point.mechanical_notes || strings().noMechanicalNotes]),
      gallery,
      notes,
    );
  }

  async showDashboard(): Promise<void> {
    const progress = await this.client.progress(this.state.date);
    const rows = Object.entries(progress.by_status).map(([status, count]) =>
      el('tr', {}, [el('td', {}, [status]), el('td', {}, [String(count)])]),
    );
    const zoneRows = Object.entries(progress.by_zone).map(([zone, rate]) =>
      el('tr', {}, [
        el('td', {}, [el('a', { href: `#/map/${zone}` }, [zone])]),
        el('td', {}, [`${(rate * 100).toFixed(0)}%`]),
      ]),
    );
    this.frame(
      el('h2', {}, [`Progress ${progress.date}`]),
      el('p', { class: 'completion' }, [
        `${(progress.completion_rate * 100).toFixed(0)}% of ${progress.total} task(s) complete`,
      ]),
      el('table', { class: 'progress-table' }, rows),
      el('h3', {}, ['By zone']),
      el('table', { class: 'zone-table' }, zoneRows),
    );
  }
}

export function boot(): void {
  const root = document.getElementById('app');
  const bannerNode = document.getElementById('sync-banner');
  if (!root || !bannerNode) throw new Error('missing #app / #sync-banner mount points');
  const client = new ApiClient();
  const app = new App(client, root, new SyncBanner(client, bannerNode));
  app.start();
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  boot();
}
