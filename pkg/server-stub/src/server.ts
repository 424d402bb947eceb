// Minimal reference server for the evaluator wire protocol.
//
//   node dist/server.js --port 8700 --mode game24
//   node dist/server.js --port 8700 --mode scripted --fixture exchanges.json
//
// Every request is logged as a JSON line ({"path", "body"}) to stdout or
// to --log PATH, so a conformance run can be replayed later. Requests are
// handled one at a time; clients with an in-flight pool must tolerate
// serialized responses.

import * as fs from "node:fs";
import * as http from "node:http";

import { Fixture, Game24Mode, Reply, ScriptedMode, validateRequest } from "./modes";

export interface StubOptions {
  port: number;
  mode: "scripted" | "game24";
  fixturePath?: string;
  logPath?: string;
}

export function parseArgs(argv: string[]): StubOptions {
  const options: StubOptions = { port: 8700, mode: "game24" };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (flag === "--port") {
      options.port = Number.parseInt(value, 10);
      i++;
    } else if (flag === "--mode") {
      if (value !== "scripted" && value !== "game24") {
        throw new Error(`unknown mode ${value}`);
      }
      options.mode = value;
      i++;
    } else if (flag === "--fixture") {
      options.fixturePath = value;
      i++;
    } else if (flag === "--log") {
      options.logPath = value;
      i++;
    } else {
      throw new Error(`unknown flag ${flag}`);
    }
  }
  if (options.mode === "scripted" && !options.fixturePath) {
    throw new Error("scripted mode requires --fixture");
  }
  return options;
}

export function createStubServer(options: StubOptions): http.Server {
  let handler: ScriptedMode | Game24Mode;
  if (options.mode === "scripted") {
    const fixture = JSON.parse(fs.readFileSync(options.fixturePath!, "utf-8")) as Fixture;
    handler = new ScriptedMode(fixture);
  } else {
    handler = new Game24Mode();
  }

  const logLine = (entry: unknown) => {
    const line = JSON.stringify(entry) + "\n";
    if (options.logPath) {
      fs.appendFileSync(options.logPath, line);
    } else {
      process.stdout.write(line);
    }
  };

  return http.createServer((req, res) => {
    const reply = (r: Reply) => {
      const data = Buffer.from(JSON.stringify(r.body));
      res.writeHead(r.status, {
        "Content-Type": "application/json",
        "Content-Length": data.length,
      });
      res.end(data);
    };

    if (req.method !== "POST" || !(req.url === "/v1/propose" || req.url === "/v1/value")) {
      reply({ status: 404, body: { error: `no route ${req.method} ${req.url}` } });
      return;
    }
    const chunks: Buffer[] = [];
    req.on("data", (chunk) => chunks.push(chunk));
    req.on("end", () => {
      let body: unknown;
      try {
        body = JSON.parse(Buffer.concat(chunks).toString("utf-8"));
      } catch {
        reply({ status: 400, body: { error: "request body is not valid JSON" } });
        return;
      }
      logLine({ path: req.url, body });
      const problem = validateRequest(req.url!, body);
      if (problem) {
        reply({ status: 400, body: { error: problem } });
        return;
      }
      reply(handler.handle(req.url!, body));
    });
  });
}

if (require.main === module) {
  const options = parseArgs(process.argv.slice(2));
  const server = createStubServer(options);
  server.listen(options.port, "127.0.0.1", () => {
    process.stderr.write(
      `evaluator stub (${options.mode}) listening on http://127.0.0.1:${options.port}\n`,
    );
  });
}
