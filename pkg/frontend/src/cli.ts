#!/usr/bin/env node
/** Render evaluation CSVs and training logs as SVG figures.
 *
 *      plot curves --csv curves.csv --out figure.svg
 *      plot losses --log run1.log --log run2.log --out losses.svg
 *
 * Exit codes: 0 success, 1 bad input (missing file, malformed header), 2 usage.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { basename } from "node:path";

import { buildCurveSeries, FormatError, parseCurvesCsv } from "./csv.js";
import { parseTrainLog } from "./logs.js";
import { renderCurves, renderLosses } from "./svg.js";

const USAGE = `usage:
  plot curves --csv <path> --out <svg>
  plot losses --log <path> [--log <path> ...] --out <svg>`;

interface Args {
    csv?: string;
    logs: string[];
    out?: string;
}

function parseArgs(argv: string[]): Args {
    const args: Args = { logs: [] };
    for (let i = 0; i < argv.length; i++) {
        switch (argv[i]) {
            case "--csv":
                args.csv = argv[++i];
                break;
            case "--log":
                args.logs.push(argv[++i]);
                break;
            case "--out":
                args.out = argv[++i];
                break;
            default:
                throw new UsageError(`unknown argument: ${argv[i]}`);
        }
    }
    return args;
}

class UsageError extends Error {}

export function runCli(argv: string[]): number {
    try {
        const [command, ...rest] = argv;
        if (command === "curves") {
            const args = parseArgs(rest);
            if (!args.csv || !args.out) throw new UsageError("curves needs --csv and --out");
            const rows = parseCurvesCsv(readFileSync(args.csv, "utf-8"));
            const series = buildCurveSeries(rows);
            writeFileSync(args.out, renderCurves(series));
            console.log(`wrote ${args.out}: ${series.length} series`);
            return 0;
        }
        if (command === "losses") {
            const args = parseArgs(rest);
            if (args.logs.length === 0 || !args.out) {
                throw new UsageError("losses needs at least one --log and --out");
            }
            const logs = args.logs.map((path) =>
                parseTrainLog(readFileSync(path, "utf-8"), basename(path, ".log")),
            );
            writeFileSync(args.out, renderLosses(logs));
            const skipped = logs.reduce((acc, l) => acc + l.skipped, 0);
            console.log(
                `wrote ${args.out}: ${logs.length} run(s)` +
                    (skipped ? `, ${skipped} malformed line(s) skipped` : ""),
            );
            return 0;
        }
        throw new UsageError(USAGE);
    } catch (err) {
        if (err instanceof UsageError) {
            console.error(err.message);
            return 2;
        }
        if (err instanceof FormatError || (err as NodeJS.ErrnoException)?.code === "ENOENT") {
            console.error(`error: ${(err as Error).message}`);
            return 1;
        }
        throw err;
    }
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("plot")) {
    process.exit(runCli(process.argv.slice(2)));
}
