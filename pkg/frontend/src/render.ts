import type { PanelState } from "./panel.js";
import { buttonsEnabled } from "./panel.js";
import type { EventRecord } from "./types.js";

/**
 * HTML-string renderers for each panel region. Pure functions of the panel
 * state so the markup is unit-testable; main.ts owns the actual DOM.
 */

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderBanner(state: PanelState): string {
  if (state.connection === "disconnected") {
    return `<div class="banner banner-error">service unreachable, retrying&hellip;</div>`;
  }
  if (state.notice !== null) {
    return `<div class="banner banner-notice">${escapeHtml(state.notice)}</div>`;
  }
  return "";
}

export function renderStatus(state: PanelState): string {
  const service = state.service;
  if (service === null) {
    return `<div class="status">waiting for first state&hellip;</div>`;
  }
  const frame =
    service.frame_index === null
      ? "frame &ndash;"
      : `frame ${service.frame_index} / ${service.frames_total - 1}`;
  const phase = service.finished
    ? `<span class="phase phase-done">replay finished</span>`
    : service.pending_request
      ? `<span class="phase phase-ask">feedback requested</span>`
      : `<span class="phase phase-run">running</span>`;
  return `<div class="status">${frame} ${phase}</div>`;
}

export function renderFrameView(state: PanelState, imageUrl: (index: number) => string): string {
  const service = state.service;
  if (service === null || service.frame_index === null) {
    return `<div class="frame-placeholder">no frame yet</div>`;
  }
  const index = service.frame_index;
  // the placeholder sits underneath; the img covers it when the bytes exist
  return (
    `<div class="frame-box">` +
    `<div class="frame-placeholder">frame ${index}</div>` +
    `<img class="frame-image" src="${imageUrl(index)}" alt="frame ${index}"` +
    ` onerror="this.style.display='none'" onload="this.style.display='block'">` +
    `</div>`
  );
}

function gaugeBar(fraction: number, cssClass: string): string {
  const percent = Math.max(0, Math.min(1, fraction)) * 100;
  return `<div class="gauge"><div class="gauge-fill ${cssClass}" style="width:${percent.toFixed(1)}%"></div></div>`;
}

export function renderGauges(state: PanelState): string {
  const service = state.service;
  const pKnown = service?.p_known ?? null;
  const known =
    pKnown === null
      ? `<div class="gauge-row"><span class="gauge-label">P(known)</span><span class="gauge-value">&ndash;</span></div>`
      : `<div class="gauge-row"><span class="gauge-label">P(known)</span>${gaugeBar(pKnown, "fill-known")}<span class="gauge-value">${pKnown.toFixed(3)}</span></div>`;

  const score = service?.competence_score ?? null;
  let competence: string;
  if (score === null) {
    competence = `<div class="gauge-row"><span class="gauge-label">competence</span><span class="gauge-value muted">no opinion</span></div>`;
  } else {
    // signed score on a [-1, +1] bar: fill grows from the midline
    const half = Math.abs(score) * 50;
    const left = score >= 0 ? 50 : 50 - half;
    const cls = score >= 0 ? "fill-competent" : "fill-incompetent";
    competence =
      `<div class="gauge-row"><span class="gauge-label">competence</span>` +
      `<div class="gauge gauge-signed"><div class="gauge-midline"></div>` +
      `<div class="gauge-fill ${cls}" style="left:${left.toFixed(1)}%;width:${half.toFixed(1)}%"></div></div>` +
      `<span class="gauge-value">${score >= 0 ? "+" : ""}${score.toFixed(3)}</span></div>`;
  }
  return known + competence;
}

export function renderExpert(state: PanelState): string {
  const expert = state.service?.expert ?? null;
  if (expert === null) {
    return "";
  }
  const rows = expert.per_statement
    .map(
      (s) =>
        `<tr><td>${escapeHtml(s.statement)}</td><td>${s.score.toFixed(3)}</td><td>${escapeHtml(s.witness)}</td></tr>`,
    )
    .join("");
  return (
    `<div class="expert"><div class="expert-head">knowledge statements ` +
    `(P(incompetent) ${expert.p_incompetent.toFixed(3)}, P(competent) ${expert.p_competent.toFixed(3)})</div>` +
    `<table><thead><tr><th>statement</th><th>score</th><th>witness</th></tr></thead>` +
    `<tbody>${rows}</tbody></table></div>`
  );
}

export function renderButtons(state: PanelState): string {
  const disabled = buttonsEnabled(state) ? "" : " disabled";
  return (
    `<button class="feedback feedback-competent" data-label="competent"${disabled}>Competent</button>` +
    `<button class="feedback feedback-incompetent" data-label="incompetent"${disabled}>Not competent</button>`
  );
}

function describeEvent(event: EventRecord): string {
  const score =
    event.competence_score === undefined
      ? ""
      : `, score ${event.competence_score >= 0 ? "+" : ""}${event.competence_score.toFixed(3)}`;
  const feedback = event.feedback
    ? ` &rarr; ${escapeHtml(event.feedback.label)} (${escapeHtml(event.feedback.source)})`
    : "";
  return `p ${event.p_known.toFixed(3)}${score}${feedback}`;
}

export function renderTimeline(events: EventRecord[]): string {
  if (events.length === 0) {
    return `<div class="timeline-empty">no events yet</div>`;
  }
  // newest on top, service log order otherwise untouched
  const items = events
    .map(
      (event) =>
        `<li class="event event-${event.action.toLowerCase()}">` +
        `<span class="event-frame">${event.frame_index}</span>` +
        `<span class="event-action">${event.action}</span>` +
        `<span class="event-detail">${describeEvent(event)}</span></li>`,
    )
    .reverse()
    .join("");
  return `<ol class="timeline">${items}</ol>`;
}
