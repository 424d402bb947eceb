// Request handling for the two stub modes.
//
// scripted: responses come from an ordered fixture of exchanges; in strict
// mode any out-of-order or unexpected request is answered with an error
// response instead of a guess.
// game24: values and proposals computed from the exact Game24 oracle.

import { proposeActions, stateValue } from "./game24";

export interface Exchange {
  request: { path: string; body: unknown };
  response: unknown;
}

export interface Fixture {
  strict_order?: boolean;
  exchanges: Exchange[];
}

export interface Reply {
  status: number;
  body: unknown;
}

export function deepEqual(a: unknown, b: unknown): boolean {
  if (a === b) return true;
  if (typeof a === "number" && typeof b === "number") return a === b;
  if (Array.isArray(a) && Array.isArray(b)) {
    return a.length === b.length && a.every((v, i) => deepEqual(v, b[i]));
  }
  if (a && b && typeof a === "object" && typeof b === "object") {
    const ka = Object.keys(a as object).sort();
    const kb = Object.keys(b as object).sort();
    return (
      ka.length === kb.length &&
      ka.every((k, i) => k === kb[i] &&
        deepEqual((a as Record<string, unknown>)[k], (b as Record<string, unknown>)[k]))
    );
  }
  return false;
}

export class ScriptedMode {
  private cursor = 0;
  private used: boolean[];

  constructor(private fixture: Fixture) {
    this.used = fixture.exchanges.map(() => false);
  }

  handle(path: string, body: unknown): Reply {
    const strict = this.fixture.strict_order !== false;
    if (strict) {
      if (this.cursor >= this.fixture.exchanges.length) {
        return { status: 409, body: { error: `unexpected request ${path}: fixture exhausted` } };
      }
      const expected = this.fixture.exchanges[this.cursor];
      if (expected.request.path !== path || !deepEqual(expected.request.body, body)) {
        return {
          status: 409,
          body: {
            error:
              `request ${this.cursor} mismatch: expected ` +
              `${expected.request.path} ${JSON.stringify(expected.request.body)}, ` +
              `got ${path} ${JSON.stringify(body)}`,
          },
        };
      }
      this.cursor += 1;
      return { status: 200, body: expected.response };
    }
    for (let i = 0; i < this.fixture.exchanges.length; i++) {
      const candidate = this.fixture.exchanges[i];
      if (!this.used[i] && candidate.request.path === path &&
          deepEqual(candidate.request.body, body)) {
        this.used[i] = true;
        return { status: 200, body: candidate.response };
      }
    }
    return { status: 409, body: { error: `no fixture matches ${path} ${JSON.stringify(body)}` } };
  }
}

export class Game24Mode {
  handle(path: string, body: unknown): Reply {
    const record = body as Record<string, unknown>;
    try {
      if (path === "/v1/propose") {
        const actions = proposeActions(
          record.state as string,
          record.w as number,
          record.temperature as number,
        );
        return { status: 200, body: { actions } };
      }
      return { status: 200, body: { value: stateValue(record.state as string) } };
    } catch (err) {
      return { status: 400, body: { error: String(err instanceof Error ? err.message : err) } };
    }
  }
}

export function validateRequest(path: string, body: unknown): string | null {
  if (body === null || typeof body !== "object" || Array.isArray(body)) {
    return "request body must be a JSON object";
  }
  const record = body as Record<string, unknown>;
  if (typeof record.state !== "string") return "missing string field 'state'";
  if (path === "/v1/propose") {
    if (typeof record.w !== "number" || !Number.isInteger(record.w) || record.w < 1) {
      return "'w' must be a positive integer";
    }
    if (typeof record.temperature !== "number" || !Number.isFinite(record.temperature)) {
      return "'temperature' must be a finite number";
    }
  }
  return null;
}
