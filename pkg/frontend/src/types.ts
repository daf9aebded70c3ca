/** Payload shapes of the annotation service JSON API (schemaVersion 1). */

export interface ExampleSentence {
  sentence: string;
  gloss: string;
  translation: string;
  matchedToken?: string;
}

export interface ReverseLine {
  word: string;
  items: [string, string][];
}

export interface TokenEvidence {
  distribution: [string, number][];
  features: string[];
  exactExamples: ExampleSentence[];
  approximateExamples: ExampleSentence[];
  reverse: ReverseLine[];
}

export interface GlossedToken {
  word: string;
  glosses: string[];
  injectedPair: [string, string] | null;
  evidence: TokenEvidence;
}

export interface GlossResponse {
  schemaVersion: number;
  snapshotId: string;
  machineGenerated: boolean;
  tokens: GlossedToken[];
}

export type FeedbackOrigin = 'accepted-suggestion' | 'manual-edit';

export interface FeedbackPayload {
  tokens: string[];
  translation: string;
  position: number;
  acceptedGloss: string;
  annotatorId: string;
  origin: FeedbackOrigin;
  rank: number | null;
}

export interface FeedbackResponse {
  schemaVersion: number;
  snapshotId: string;
}

export interface ConfusionPair {
  a: string;
  b: string;
  count: number;
}

export interface ConfusionsResponse {
  schemaVersion: number;
  pairs: ConfusionPair[];
  tokenErrors: number;
  aggregates: Record<string, number>;
}

export interface InstructionResponse {
  schemaVersion: number;
  machineGenerated: boolean;
  pair: [string, string];
  text: string;
  model: string;
  temperature: number;
  promptHash: string;
  createdAt: string;
  instanceCount: number;
}

export interface HealthResponse {
  schemaVersion: number;
  status: string;
  snapshotId: string;
  entries: number;
  feedbackCount: number;
  pendingCount: number;
}

export interface ApiError {
  kind: string;
  message: string;
}
