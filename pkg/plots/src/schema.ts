import Papa from "papaparse";

/** Fixed column order of the sweep CSV emitted by the compute CLI. */
export const SWEEP_COLUMNS = [
  "sweep_var",
  "N",
  "nS",
  "nD",
  "gammaS",
  "gammaD",
  "C1",
  "C2",
  "C3",
  "C4",
  "sigmaN",
  "regime",
] as const;

export const FLASH_COLUMNS = ["t", "rate"] as const;

export interface SweepRow {
  sweepVar: number;
  N: number;
  nS: number;
  nD: number;
  gammaS: number;
  gammaD: number;
  /** Cumulant rates; null where the producing sweep left the field empty. */
  C: Record<1 | 2 | 3 | 4, number | null>;
  sigmaN: number | null;
  regime: string;
}

export interface FlashRow {
  t: number;
  rate: number;
}

export class SchemaError extends Error {}

function parseCsv(text: string): string[][] {
  const result = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (result.errors.length > 0) {
    throw new SchemaError(`CSV parse failure: ${result.errors[0].message}`);
  }
  return result.data;
}

function toNumber(field: string, context: string): number {
  const value = Number(field);
  if (field === "" || !Number.isFinite(value)) {
    throw new SchemaError(`non-numeric value ${JSON.stringify(field)} in ${context}`);
  }
  return value;
}

function toOptionalNumber(field: string, context: string): number | null {
  return field === "" ? null : toNumber(field, context);
}

/** Parse and validate a sweep CSV; the header must match the schema exactly. */
export function parseSweepCsv(text: string): SweepRow[] {
  const rows = parseCsv(text);
  if (rows.length === 0) {
    throw new SchemaError("empty CSV");
  }
  const header = rows[0];
  if (header.length !== SWEEP_COLUMNS.length || header.some((h, i) => h !== SWEEP_COLUMNS[i])) {
    throw new SchemaError(
      `header mismatch: expected "${SWEEP_COLUMNS.join(",")}", got "${header.join(",")}"`,
    );
  }
  if (rows.length === 1) {
    throw new SchemaError("sweep CSV has no data rows");
  }
  return rows.slice(1).map((cells, index) => {
    const where = `row ${index + 2}`;
    if (cells.length !== SWEEP_COLUMNS.length) {
      throw new SchemaError(`wrong field count in ${where}`);
    }
    return {
      sweepVar: toNumber(cells[0], where),
      N: toNumber(cells[1], where),
      nS: toNumber(cells[2], where),
      nD: toNumber(cells[3], where),
      gammaS: toNumber(cells[4], where),
      gammaD: toNumber(cells[5], where),
      C: {
        1: toOptionalNumber(cells[6], where),
        2: toOptionalNumber(cells[7], where),
        3: toOptionalNumber(cells[8], where),
        4: toOptionalNumber(cells[9], where),
      },
      sigmaN: toOptionalNumber(cells[10], where),
      regime: cells[11],
    };
  });
}

/** Coupling-weighted effective occupation of a sweep row. */
export function effectiveOccupation(row: SweepRow): number {
  const total = row.gammaS + row.gammaD;
  if (total <= 0) {
    throw new SchemaError("row has no reservoir coupling");
  }
  return (row.gammaS * row.nS + row.gammaD * row.nD) / total;
}

/** Parse the transient flash CSV (t,rate). */
export function parseFlashCsv(text: string): FlashRow[] {
  const rows = parseCsv(text);
  if (rows.length === 0) {
    throw new SchemaError("empty CSV");
  }
  const header = rows[0];
  if (header.length !== 2 || header[0] !== "t" || header[1] !== "rate") {
    throw new SchemaError(`header mismatch: expected "t,rate", got "${header.join(",")}"`);
  }
  if (rows.length === 1) {
    throw new SchemaError("flash CSV has no data rows");
  }
  return rows.slice(1).map((cells, index) => ({
    t: toNumber(cells[0], `row ${index + 2}`),
    rate: toNumber(cells[1], `row ${index + 2}`),
  }));
}
