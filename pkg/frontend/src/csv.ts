/** CSV ingestion with exact-header schema validation. */

export class SchemaError extends Error {
  constructor(public column: string, message: string) {
    super(message);
  }
}

export interface Table {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): Table {
  const lines = text
    .split(/\r?\n/)
    .filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new SchemaError("<empty>", "empty CSV");
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line) => line.split(","));
  return { header, rows };
}

/** Validate the header against a declared schema; report the first offending
 * column by name so the caller can exit with a useful message. */
export function requireSchema(table: Table, expected: string[], what: string): void {
  const n = Math.max(table.header.length, expected.length);
  for (let i = 0; i < n; i++) {
    const got = table.header[i];
    const want = expected[i];
    if (got !== want) {
      const offender = want ?? got;
      throw new SchemaError(
        offender,
        `${what}: column ${i} is ${JSON.stringify(got ?? "<missing>")}, expected ${JSON.stringify(want ?? "<none>")}`,
      );
    }
  }
}

export function num(value: string, column: string): number {
  const parsed = Number(value);
  if (!Number.isFinite(parsed)) {
    throw new SchemaError(column, `non-numeric value ${JSON.stringify(value)} in column ${column}`);
  }
  return parsed;
}

export const SCAN_SCHEMA = ["n", "preset", "sigma_opt", "esjd", "acc", "esjd_n13"];
export const CLT_SCHEMA = ["n", "ell", "emp_mean", "emp_var", "pred_mean", "pred_var", "ks"];
export const POISSON_SCHEMA = ["scenario", "rep", "preset", "median_ess", "min_ess", "acc"];
