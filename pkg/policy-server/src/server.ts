/**
 * Newline-delimited JSON prior server over stdio.
 *
 * Usage: node server.js [--mode uniform|stub] [--fault-after N]
 *
 * Exactly one response line per request line, in order.  The loop is
 * single-threaded; concurrency belongs to the client, which may run one
 * server per worker.  --fault-after N answers the first N requests
 * normally and then emits non-JSON garbage, so client-side fault
 * handling can be exercised end to end.
 */

import { createInterface } from 'node:readline';
import { pathToFileURL } from 'node:url';
import { answer, parseRequest, serializeResponse, type Mode } from './protocol.js';

export interface ServerOptions {
  mode: Mode;
  /** Respond normally this many times, then emit garbage; -1 never faults. */
  faultAfter: number;
}

function usageError(message: string): never {
  process.stderr.write(`${message}\n`);
  process.stderr.write('usage: server.js [--mode uniform|stub] [--fault-after N]\n');
  process.exit(2);
}

export function parseArgs(argv: string[]): ServerOptions {
  const opts: ServerOptions = { mode: 'uniform', faultAfter: -1 };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    if (flag === '--mode') {
      const value = argv[++i];
      if (value !== 'uniform' && value !== 'stub') {
        usageError(`unknown mode: ${value ?? '(missing)'}`);
      }
      opts.mode = value;
    } else if (flag === '--fault-after') {
      const value = Number(argv[++i]);
      if (!Number.isInteger(value) || value < 0) {
        usageError('--fault-after takes a non-negative integer');
      }
      opts.faultAfter = value;
    } else {
      usageError(`unknown flag: ${flag}`);
    }
  }
  return opts;
}

export function serve(opts: ServerOptions): void {
  let responded = 0;
  const rl = createInterface({ input: process.stdin, terminal: false });
  rl.on('line', (line) => {
    if (line.trim() === '') return;
    if (opts.faultAfter >= 0 && responded >= opts.faultAfter) {
      responded += 1;
      process.stdout.write('deliberately malformed fault-injection response\n');
      return;
    }
    const parsed = parseRequest(line);
    const response = parsed.ok ? answer(parsed.req, opts.mode) : { err: parsed.err };
    process.stdout.write(serializeResponse(response));
    responded += 1;
  });
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  serve(parseArgs(process.argv.slice(2)));
}
