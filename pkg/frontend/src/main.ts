import { ServiceClient } from "./client.js";
import {
  applyEvents,
  applyPollFailure,
  applyState,
  applySubmissionResult,
  beginSubmission,
  buttonsEnabled,
  initialState,
  nextPollDelay,
  type PanelState,
} from "./panel.js";
import {
  renderBanner,
  renderButtons,
  renderExpert,
  renderFrameView,
  renderGauges,
  renderStatus,
  renderTimeline,
} from "./render.js";
import type { CompetenceLabel } from "./types.js";

const baseUrl = (window as { COMPASS_BASE_URL?: string }).COMPASS_BASE_URL ?? "";
const client = new ServiceClient(baseUrl);

let state: PanelState = initialState();
let pollTimer: number | undefined;

function region(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing panel region #${id}`);
  }
  return node;
}

function render(): void {
  region("banner").innerHTML = renderBanner(state);
  region("status").innerHTML = renderStatus(state);
  region("gauges").innerHTML = renderGauges(state);
  region("expert").innerHTML = renderExpert(state);
  region("buttons").innerHTML = renderButtons(state);
  region("timeline").innerHTML = renderTimeline(state.events);
  renderFrameRegion();
}

let renderedFrame: number | null = null;

function renderFrameRegion(): void {
  // re-render only on frame change so the <img> isn't reloaded every poll
  const frame = state.service?.frame_index ?? null;
  if (frame === renderedFrame && frame !== null) {
    return;
  }
  renderedFrame = frame;
  region("frame").innerHTML = renderFrameView(state, (index) => client.imageUrl(index));
}

async function poll(): Promise<void> {
  try {
    const service = await client.getState();
    state = applyState(state, service);
    state = applyEvents(state, await client.getEvents());
  } catch {
    state = applyPollFailure(state);
  }
  render();
  pollTimer = window.setTimeout(poll, nextPollDelay(state));
}

async function submit(label: CompetenceLabel): Promise<void> {
  if (!buttonsEnabled(state) || state.service?.frame_index == null) {
    return;
  }
  const frameIndex = state.service.frame_index;
  state = beginSubmission(state);
  render();
  try {
    const result = await client.submitFeedback(label, frameIndex);
    state = applySubmissionResult(state, frameIndex, label, result.status);
  } catch {
    state = applySubmissionResult(state, frameIndex, label, 0);
  }
  // resync immediately instead of waiting out the poll interval
  if (pollTimer !== undefined) {
    window.clearTimeout(pollTimer);
  }
  await poll();
}

region("buttons").addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  const label = target.dataset?.label;
  if (label === "competent" || label === "incompetent") {
    void submit(label);
  }
});

void poll();
