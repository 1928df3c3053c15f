// Shapes of the service's JSON responses (GET /api/state, GET /api/events).

export interface StatementScore {
  statement: string;
  score: number;
  witness: string;
}

export interface ExpertView {
  per_statement: StatementScore[];
  p_incompetent: number;
  p_competent: number;
}

export interface ServiceState {
  frame_index: number | null;
  p_known: number | null;
  verdict: string | null;
  competence_score: number | null;
  pending_request: boolean;
  expert: ExpertView | null;
  finished: boolean;
  frames_total: number;
}

export interface FeedbackInfo {
  label: string;
  source: string;
}

export interface EventRecord {
  frame_index: number;
  p_known: number;
  verdict: string;
  competence_score?: number;
  action: string;
  feedback?: FeedbackInfo;
  expert?: ExpertView;
  wall_time: number;
}

export type CompetenceLabel = "competent" | "incompetent";
