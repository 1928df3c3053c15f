import type { EventRecord, ServiceState } from "./types.js";

/**
 * Pure panel state and its transitions. All service interaction effects are
 * decided here and executed by the caller, which keeps the submission rules
 * (one feedback per pending request, never retry a 409) testable without a
 * DOM or a network.
 */

export interface PanelState {
  connection: "connected" | "disconnected";
  /** consecutive failed polls, drives the retry backoff */
  failures: number;
  service: ServiceState | null;
  events: EventRecord[];
  /** frame index a submission was sent for; locks the buttons until the
   *  service state moves past that request */
  lockedFrame: number | null;
  /** non-blocking notice, e.g. after a 409 */
  notice: string | null;
  lastAck: { frameIndex: number; label: string } | null;
}

export const POLL_INTERVAL_MS = 500;
const BACKOFF_CAP_MS = 8000;

export function initialState(): PanelState {
  return {
    connection: "disconnected",
    failures: 0,
    service: null,
    events: [],
    lockedFrame: null,
    notice: null,
    lastAck: null,
  };
}

/** A state poll succeeded. */
export function applyState(state: PanelState, service: ServiceState): PanelState {
  let lockedFrame = state.lockedFrame;
  // release the lock once the locked request is gone: either nothing is
  // pending anymore or a different frame is asking
  if (lockedFrame !== null && (!service.pending_request || service.frame_index !== lockedFrame)) {
    lockedFrame = null;
  }
  return { ...state, connection: "connected", failures: 0, service, lockedFrame };
}

/** An events poll succeeded; the service log order is authoritative. */
export function applyEvents(state: PanelState, events: EventRecord[]): PanelState {
  return { ...state, events };
}

/** A poll failed: show the banner and back off. */
export function applyPollFailure(state: PanelState): PanelState {
  return { ...state, connection: "disconnected", failures: state.failures + 1 };
}

/** Millis until the next poll; exponential while disconnected. */
export function nextPollDelay(state: PanelState, base: number = POLL_INTERVAL_MS): number {
  if (state.connection === "connected") {
    return base;
  }
  return Math.min(base * 2 ** state.failures, BACKOFF_CAP_MS);
}

export function buttonsEnabled(state: PanelState): boolean {
  return (
    state.connection === "connected" &&
    state.service !== null &&
    state.service.pending_request &&
    state.lockedFrame === null
  );
}

/** The operator clicked a feedback button; lock until the state moves on. */
export function beginSubmission(state: PanelState): PanelState {
  if (!buttonsEnabled(state) || state.service === null) {
    return state;
  }
  return { ...state, lockedFrame: state.service.frame_index, notice: null };
}

/** Outcome of the POST: 200 keeps the lock until the next pending request
 *  appears, 409 surfaces a notice and lets the next poll resync. */
export function applySubmissionResult(
  state: PanelState,
  frameIndex: number,
  label: string,
  status: number,
): PanelState {
  if (status === 200) {
    return { ...state, lastAck: { frameIndex, label }, notice: null };
  }
  if (status === 409) {
    return {
      ...state,
      lockedFrame: null,
      notice: `feedback for frame ${frameIndex} was no longer pending`,
    };
  }
  return { ...state, lockedFrame: null, notice: `feedback failed with status ${status}` };
}
