/** Typed client for the annotation service. The fetch function is
 * injectable so tests can run against a scripted transport. */

import type {
  ConfusionsResponse,
  FeedbackPayload,
  FeedbackResponse,
  GlossResponse,
  HealthResponse,
  InstructionResponse,
} from './types';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiRequestError extends Error {
  constructor(
    message: string,
    public readonly status: number,
    public readonly kind: string,
  ) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<ApiRequestError> {
  let kind = 'unknown';
  let message = `HTTP ${resp.status}`;
  try {
    const body = await resp.json();
    if (body && body.error) {
      kind = body.error.kind ?? kind;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep defaults
  }
  return new ApiRequestError(message, resp.status, kind);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`);
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  health(): Promise<HealthResponse> {
    return this.get('/api/health');
  }

  gloss(tokens: string[], translation: string): Promise<GlossResponse> {
    return this.post('/api/gloss', { tokens, translation });
  }

  feedback(payload: FeedbackPayload): Promise<FeedbackResponse> {
    return this.post('/api/feedback', payload);
  }

  confusions(): Promise<ConfusionsResponse> {
    return this.get('/api/confusions');
  }

  generateInstructions(a: string, b: string, devCount = 0): Promise<InstructionResponse> {
    return this.post('/api/instructions/generate', { a, b, devCount });
  }
}
