/** Parser for the evaluation curve CSV written by the training pipeline. */

export const EXPECTED_HEADER =
    "scheme,key_len,message_dist,decoder,examples,accuracy,n,stderr";

export interface CurveRow {
    scheme: string;
    keyLen: string;
    messageDist: string;
    decoder: string;
    examples: number;
    accuracy: number;
    n: number;
    stderr: number;
}

/** One plottable line: the rows of a (scheme, key_len, dist, decoder) group. */
export interface CurveSeries {
    label: string;
    decoder: string;
    x: number[];
    y: number[];
    stderr: number[];
}

export class FormatError extends Error {}

export function parseCurvesCsv(text: string): CurveRow[] {
    const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
    if (lines.length === 0 || lines[0] !== EXPECTED_HEADER) {
        throw new FormatError(
            `bad CSV header: expected "${EXPECTED_HEADER}", got "${lines[0] ?? ""}"`,
        );
    }
    const rows: CurveRow[] = [];
    for (let i = 1; i < lines.length; i++) {
        const parts = lines[i].split(",");
        if (parts.length !== 8) {
            throw new FormatError(`line ${i + 1}: expected 8 fields, got ${parts.length}`);
        }
        const [scheme, keyLen, messageDist, decoder, examples, accuracy, n, stderr] = parts;
        const row: CurveRow = {
            scheme,
            keyLen,
            messageDist,
            decoder,
            examples: Number(examples),
            accuracy: Number(accuracy),
            n: Number(n),
            stderr: Number(stderr),
        };
        if (
            !Number.isInteger(row.examples) ||
            !Number.isInteger(row.n) ||
            !Number.isFinite(row.accuracy) ||
            !Number.isFinite(row.stderr)
        ) {
            throw new FormatError(`line ${i + 1}: non-numeric data field`);
        }
        rows.push(row);
    }
    if (rows.length === 0) {
        throw new FormatError("CSV contains a header but no data rows");
    }
    return rows;
}

/** Round-trip check support: serialize rows back to the canonical format. */
export function formatCurvesCsv(rows: CurveRow[]): string {
    const body = rows.map(
        (r) =>
            `${r.scheme},${r.keyLen},${r.messageDist},${r.decoder},` +
            `${r.examples},${r.accuracy.toFixed(6)},${r.n},${r.stderr.toFixed(6)}`,
    );
    return [EXPECTED_HEADER, ...body].join("\n") + "\n";
}

/** Group rows into one series per setting, x ascending; this is exactly the
 *  data the renderer draws. */
export function buildCurveSeries(rows: CurveRow[]): CurveSeries[] {
    const groups = new Map<string, CurveRow[]>();
    for (const row of rows) {
        const key = `${row.scheme}|${row.keyLen}|${row.messageDist}|${row.decoder}`;
        const list = groups.get(key) ?? [];
        list.push(row);
        groups.set(key, list);
    }
    const manySettings =
        new Set([...groups.keys()].map((k) => k.split("|").slice(0, 3).join("|"))).size > 1;
    const series: CurveSeries[] = [];
    for (const [key, list] of groups) {
        list.sort((a, b) => a.examples - b.examples);
        const [scheme, keyLen, dist, decoder] = key.split("|");
        series.push({
            label: manySettings ? `${decoder} (${scheme} ${keyLen} ${dist})` : decoder,
            decoder,
            x: list.map((r) => r.examples),
            y: list.map((r) => r.accuracy),
            stderr: list.map((r) => r.stderr),
        });
    }
    series.sort((a, b) => (a.label < b.label ? -1 : a.label > b.label ? 1 : 0));
    return series;
}
