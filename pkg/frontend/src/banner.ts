/**
 * Connection banner: shows the welcome/wait message until the first
 * successful sync poll, flips to an offline banner (read-only hint) when
 * the watcher goes down, and clears again on reconnect.
 */

import { ApiClient } from './api.js';
import { strings } from './strings.js';
import type { SyncStatus } from './types.js';

export type BannerMode = 'connecting' | 'online' | 'offline';

export interface BannerState {
  mode: BannerMode;
  lastSync: string | null;
  everConnected: boolean;
}

export function initialBanner(): BannerState {
  return { mode: 'connecting', lastSync: null, everConnected: false };
}

export function applySyncStatus(state: BannerState, status: SyncStatus): BannerState {
  if (status.connected) {
    return { mode: 'online', lastSync: status.last_sync, everConnected: true };
  }
  return { ...state, mode: 'offline' };
}

export function applyPollFailure(state: BannerState): BannerState {
  return { ...state, mode: state.everConnected ? 'offline' : 'connecting' };
}

export class SyncBanner {
  state: BannerState = initialBanner();

  constructor(
    private readonly client: ApiClient,
    private readonly node: HTMLElement,
  ) {
    this.render();
  }

  /** One poll cycle; the app schedules this on an interval. */
  async tick(): Promise<BannerState> {
    try {
      const status = await this.client.sync();
      this.state = applySyncStatus(this.state, status);
    } catch {
      this.state = applyPollFailure(this.state);
    }
    this.render();
    return this.state;
  }

  render(): void {
    const { mode, lastSync } = this.state;
    this.node.dataset.mode = mode;
    if (mode === 'connecting') {
      this.node.textContent = strings().waitingForConnection;
      this.node.hidden = false;
    } else if (mode === 'offline') {
      this.node.textContent = strings().offlineReadOnly;
      this.node.hidden = false;
    } else {
      this.node.textContent = lastSync ? strings().synchronizedAt(lastSync) : strings().connected;
      this.node.hidden = true;
    }
  }
}
