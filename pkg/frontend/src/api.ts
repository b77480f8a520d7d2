/**
 * Typed client for the prediction service JSON API.
 *
 * The base URL is configurable at load time (see main.ts); all paths are
 * relative to it. The client does no caching and no retries itself —
 * retry affordances live in the UI so answer state is never touched.
 */

export interface QuestionOption {
  code: number;
  label: string;
}

export interface Question {
  id: string;
  text: string;
  kind: string; // single-choice | multi-select | numeric-range
  multi: boolean;
  options: QuestionOption[];
}

export interface QuestionsPayload {
  catalog_version: string;
  questions: Question[];
}

export interface PredictionResponse {
  probability_yes: number;
  label: number;
  model_id: string;
  catalog_version: string;
}

/** A single-choice answer is one code; a multi-select is the selected codes. */
export type AnswerValue = number | number[];
export type AnswersMap = Record<string, AnswerValue>;

export type ApiErrorKind = 'network' | 'validation' | 'server';

export class ApiError extends Error {
  kind: ApiErrorKind;
  status: number | null;
  /** Question id the server blamed, when it named one. */
  questionId: string | null;

  constructor(kind: ApiErrorKind, message: string, status: number | null = null, questionId: string | null = null) {
    super(message);
    this.kind = kind;
    this.status = status;
    this.questionId = questionId;
  }
}

async function parseErrorBody(response: Response): Promise<ApiError> {
  let detail = `request failed with status ${response.status}`;
  let questionId: string | null = null;
  try {
    const body = await response.json();
    if (typeof body.detail === 'string') detail = body.detail;
    else if (body.detail) detail = JSON.stringify(body.detail);
    if (typeof body.question === 'string') questionId = body.question;
  } catch {
    // non-JSON error body: keep the status message
  }
  const kind: ApiErrorKind = response.status === 400 || response.status === 422 ? 'validation' : 'server';
  return new ApiError(kind, detail, response.status, questionId);
}

export async function fetchQuestions(baseUrl: string): Promise<QuestionsPayload> {
  let response: Response;
  try {
    response = await fetch(`${baseUrl}/api/questions`);
  } catch (err) {
    throw new ApiError('network', `could not reach the service: ${String(err)}`);
  }
  if (!response.ok) throw await parseErrorBody(response);
  return (await response.json()) as QuestionsPayload;
}

export async function submitAnswers(baseUrl: string, answers: AnswersMap): Promise<PredictionResponse> {
  let response: Response;
  try {
    response = await fetch(`${baseUrl}/api/predict`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ answers }),
    });
  } catch (err) {
    throw new ApiError('network', `could not reach the service: ${String(err)}`);
  }
  if (!response.ok) throw await parseErrorBody(response);
  return (await response.json()) as PredictionResponse;
}
