/**
 * Externalized user-facing strings, default English. A site can swap the
 * table (or merge a partial override) without touching view code.
 */

export interface StringTable {
  waitingForConnection: string;
  offlineReadOnly: string;
  connected: string;
  synchronizedAt: (stamp: string) => string;
  emptyWorksheet: (date: string) => string;
  noMedia: string;
  missingMedia: (ref: string) => string;
  noMechanicalNotes: string;
  checkInButton: string;
  refreshAndRetry: string;
  remediation: Record<string, string>;
}

export const EN: StringTable = {
  waitingForConnection:
    'Welcome. Waiting for the LIMS connection and worksheet synchronization…',
  offlineReadOnly: 'Offline: worksheet sync is down, data shown read-only.',
  connected: 'Connected.',
  synchronizedAt: (stamp) => `Synchronized ${stamp}`,
  emptyWorksheet: (date) => `No sampling tasks for ${date}.`,
  noMedia: 'No media for this point yet.',
  missingMedia: (ref) => `missing media: ${ref}`,
  noMechanicalNotes: 'no mechanical notes',
  checkInButton: 'Check in',
  refreshAndRetry: 'Refresh and retry',
  remediation: {
    Conflict: 'Someone else updated this task. Refresh to load the latest state and retry.',
    WrongPhase: 'The round is not in the field-sampling phase yet.',
    UnauthorizedRole: 'Your role may not check in tasks; ask a technician.',
    StatusRegression: 'This task is already completed; record a deviation instead.',
    EmptyCheckIn: 'Tick at least one new step before submitting.',
    UnknownStep: 'The checklist is out of date; reload the task.',
    ClockSkew: 'Device clock looks behind the last recorded event; sync time and retry.',
    Unreachable: 'Service not reachable; your selection is kept, retry when online.',
  },
};

let active: StringTable = EN;

export function strings(): StringTable {
  return active;
}

export function setStrings(table: Partial<StringTable>): void {
  active = { ...EN, ...table, remediation: { ...EN.remediation, ...(table.remediation ?? {}) } };
}
