/**
 * Wire protocol for the token-prior service.
 *
 * One JSON object per line in each direction:
 *
 *   request  {"m": 3, "requirements": [{"care": "ff", "val": "80"}],
 *             "tokens": [2, 5], "mask": [2, 3, 4, 6]}
 *   response {"p": [0.25, 0.25, 0.25, 0.25]}   aligned with the request mask
 *   failure  {"err": "reason"}
 *
 * Truth tables are lowercase hex over 2^m bits, most-significant digit
 * first.  Unknown request fields are ignored; a malformed request yields
 * exactly one err line and the stream continues.
 */

export interface Requirement {
  care: string;
  val: string;
}

export interface PriorRequest {
  m: number;
  requirements: Requirement[];
  tokens: number[];
  mask: number[];
}

export type PriorResponse = { p: number[] } | { err: string };

export type ParseResult = { ok: true; req: PriorRequest } | { ok: false; err: string };

export type Mode = 'uniform' | 'stub';

// Hard cap shared with the consuming engine; keeps 2^m bit tables sane.
const MAX_VARS = 16;

const HEX_RE = /^[0-9a-f]+$/;

function isInt(x: unknown): x is number {
  return typeof x === 'number' && Number.isInteger(x);
}

function isIntArray(x: unknown): x is number[] {
  return Array.isArray(x) && x.every((t) => isInt(t) && t >= 0);
}

/** Validate a care/val table: lowercase hex that fits in 2^m bits. */
function checkTable(x: unknown, m: number): x is string {
  if (typeof x !== 'string' || !HEX_RE.test(x)) return false;
  return BigInt(`0x${x}`) < 1n << (1n << BigInt(m));
}

/**
 * Parse one request line.  Never throws: any defect comes back as an
 * err message so the caller can answer it and keep the stream alive.
 */
export function parseRequest(line: string): ParseResult {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    return { ok: false, err: 'request is not valid JSON' };
  }
  if (typeof raw !== 'object' || raw === null || Array.isArray(raw)) {
    return { ok: false, err: 'request must be a JSON object' };
  }
  const obj = raw as Record<string, unknown>;

  const m = obj.m;
  if (!isInt(m) || m < 1 || m > MAX_VARS) {
    return { ok: false, err: `m must be an integer in 1..${MAX_VARS}` };
  }
  if (!isIntArray(obj.mask) || obj.mask.length === 0) {
    return { ok: false, err: 'mask must be a non-empty array of token ids' };
  }
  const tokens = obj.tokens ?? [];
  if (!isIntArray(tokens)) {
    return { ok: false, err: 'tokens must be an array of token ids' };
  }
  const rawReqs = obj.requirements ?? [];
  if (!Array.isArray(rawReqs)) {
    return { ok: false, err: 'requirements must be an array' };
  }
  const requirements: Requirement[] = [];
  for (const r of rawReqs) {
    if (typeof r !== 'object' || r === null || Array.isArray(r)) {
      return { ok: false, err: 'each requirement must be an object' };
    }
    const { care, val } = r as Record<string, unknown>;
    if (!checkTable(care, m) || !checkTable(val, m)) {
      return { ok: false, err: 'requirement tables must be lowercase hex over 2^m bits' };
    }
    requirements.push({ care, val });
  }
  return { ok: true, req: { m, requirements, tokens, mask: obj.mask } };
}

/** Flat prior: every masked token equally likely. */
export function uniformPrior(req: PriorRequest): number[] {
  const n = req.mask.length;
  return req.mask.map(() => 1 / n);
}

// FNV-1a, kept in uint32 throughout.
function fnv1a(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

/**
 * Placeholder scorer with the shape a learned model would have: maps the
 * full generation state plus one candidate token to a positive score.
 * Swap this function for real inference; everything around it stays put.
 */
function stubScore(req: PriorRequest, token: number): number {
  const ctx = JSON.stringify([req.m, req.requirements, req.tokens]);
  // 1/64 floor keeps every masked token reachable after normalization.
  return fnv1a(`${ctx}#${token}`) / 0x1_0000_0000 + 1 / 64;
}

/** Deterministic pseudo-model prior; bitwise stable across replays. */
export function stubPrior(req: PriorRequest): number[] {
  const scores = req.mask.map((tok) => stubScore(req, tok));
  const total = scores.reduce((acc, s) => acc + s, 0);
  return scores.map((s) => s / total);
}

/** Answer one parsed request under the selected mode. */
export function answer(req: PriorRequest, mode: Mode): PriorResponse {
  return { p: mode === 'stub' ? stubPrior(req) : uniformPrior(req) };
}

export function serializeResponse(res: PriorResponse): string {
  return `${JSON.stringify(res)}\n`;
}
