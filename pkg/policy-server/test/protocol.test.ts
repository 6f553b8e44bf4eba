import { describe, expect, it } from 'vitest';

import {
  answer,
  parseRequest,
  serializeResponse,
  stubPrior,
  uniformPrior,
  type PriorRequest,
} from '../src/protocol';

function req(partial: Partial<PriorRequest> = {}): PriorRequest {
  return { m: 3, requirements: [], tokens: [], mask: [2, 3, 4, 6], ...partial };
}

function parsed(line: string): PriorRequest {
  const result = parseRequest(line);
  if (!result.ok) throw new Error(`expected ok parse, got: ${result.err}`);
  return result.req;
}

function parseError(line: string): string {
  const result = parseRequest(line);
  if (result.ok) throw new Error('expected parse failure');
  return result.err;
}

describe('parseRequest', () => {
  it('accepts a full request and keeps field order-independent content', () => {
    const r = parsed(
      '{"m": 3, "requirements": [{"care": "ff", "val": "80"}], "tokens": [2, 5], "mask": [2, 3, 6]}',
    );
    expect(r.m).toBe(3);
    expect(r.requirements).toEqual([{ care: 'ff', val: '80' }]);
    expect(r.tokens).toEqual([2, 5]);
    expect(r.mask).toEqual([2, 3, 6]);
  });

  it('defaults tokens and requirements to empty arrays', () => {
    const r = parsed('{"m": 2, "mask": [2, 3]}');
    expect(r.tokens).toEqual([]);
    expect(r.requirements).toEqual([]);
  });

  it('ignores unknown fields', () => {
    const r = parsed('{"m": 2, "mask": [4], "hint": 42, "trace_id": "abc"}');
    expect(r.mask).toEqual([4]);
  });

  it('rejects lines that are not JSON', () => {
    expect(parseError('this is not json')).toMatch(/JSON/);
  });

  it.each(['[1, 2]', '"mask"', '7', 'null'])('rejects non-object payload %s', (line) => {
    expect(parseError(line)).toMatch(/object/);
  });

  it.each([
    ['{"mask": [2]}', /m must be/],
    ['{"m": 0, "mask": [2]}', /m must be/],
    ['{"m": 17, "mask": [2]}', /m must be/],
    ['{"m": 2.5, "mask": [2]}', /m must be/],
    ['{"m": 2}', /mask/],
    ['{"m": 2, "mask": []}', /mask/],
    ['{"m": 2, "mask": [2, "3"]}', /mask/],
    ['{"m": 2, "mask": [2, -1]}', /mask/],
    ['{"m": 2, "mask": [2], "tokens": [1.5]}', /tokens/],
    ['{"m": 2, "mask": [2], "requirements": {"care": "f", "val": "0"}}', /requirements/],
    ['{"m": 2, "mask": [2], "requirements": [7]}', /requirement/],
    ['{"m": 2, "mask": [2], "requirements": [{"care": "F", "val": "0"}]}', /hex/],
    ['{"m": 2, "mask": [2], "requirements": [{"care": "f"}]}', /hex/],
  ])('rejects malformed request %s', (line, pattern) => {
    expect(parseError(line)).toMatch(pattern);
  });

  it('rejects tables wider than 2^m bits', () => {
    // m=1 tables span 2 bits, so anything >= 4 is out of range.
    expect(parseError('{"m": 1, "mask": [2], "requirements": [{"care": "4", "val": "0"}]}')).toMatch(/hex/);
    // m=2: "f" = 15 fits in 4 bits, "10" = 16 does not.
    expect(parsed('{"m": 2, "mask": [2], "requirements": [{"care": "f", "val": "8"}]}').m).toBe(2);
    expect(parseError('{"m": 2, "mask": [2], "requirements": [{"care": "10", "val": "0"}]}')).toMatch(/hex/);
  });
});

describe('uniformPrior', () => {
  it('spreads mass evenly over the mask', () => {
    expect(uniformPrior(req({ mask: [2, 3, 4, 6] }))).toEqual([0.25, 0.25, 0.25, 0.25]);
  });

  it('stays aligned and normalized for every mask size', () => {
    for (let n = 1; n <= 20; n++) {
      const p = uniformPrior(req({ mask: Array.from({ length: n }, (_, i) => i + 2) }));
      expect(p).toHaveLength(n);
      const total = p.reduce((acc, x) => acc + x, 0);
      expect(Math.abs(total - 1)).toBeLessThanOrEqual(1e-6);
    }
  });
});

describe('stubPrior', () => {
  const base = req({
    m: 3,
    requirements: [{ care: 'ff', val: '80' }],
    tokens: [2, 4],
    mask: [2, 3, 4, 5, 6, 7],
  });

  it('is a distribution over the mask', () => {
    const p = stubPrior(base);
    expect(p).toHaveLength(base.mask.length);
    for (const x of p) expect(x).toBeGreaterThan(0);
    expect(Math.abs(p.reduce((acc, x) => acc + x, 0) - 1)).toBeLessThanOrEqual(1e-6);
  });

  it('is bitwise deterministic for identical requests', () => {
    const a = stubPrior(base);
    const b = stubPrior({ ...base, mask: [...base.mask] });
    expect(a.length).toBe(b.length);
    for (let i = 0; i < a.length; i++) expect(Object.is(a[i], b[i])).toBe(true);
  });

  it('actually conditions on the generation state', () => {
    const a = stubPrior(base);
    const b = stubPrior({ ...base, tokens: [2, 5] });
    const c = stubPrior({ ...base, requirements: [{ care: 'ff', val: '81' }] });
    expect(a).not.toEqual(b);
    expect(a).not.toEqual(c);
  });
});

describe('answer / serializeResponse', () => {
  it('dispatches on mode', () => {
    const r = req({ mask: [2, 3] });
    expect(answer(r, 'uniform')).toEqual({ p: [0.5, 0.5] });
    const stub = answer(r, 'stub');
    expect('p' in stub && stub.p).toHaveLength(2);
    expect(answer(r, 'stub')).not.toEqual(answer(r, 'uniform'));
  });

  it('emits exactly one newline-terminated line', () => {
    const line = serializeResponse({ p: [0.5, 0.5] });
    expect(line.endsWith('\n')).toBe(true);
    expect(line.slice(0, -1)).not.toContain('\n');
    expect(JSON.parse(line)).toEqual({ p: [0.5, 0.5] });
    expect(serializeResponse({ err: 'boom' })).toBe('{"err":"boom"}\n');
  });
});
