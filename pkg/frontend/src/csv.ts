/**
 * aggregate.csv loading and validation.
 *
 * The simulator's CSV contract: UTF-8, header row mandatory, '.' decimal.
 * Columns: preset, d, c, timestep, surviving_fraction, mean_active_size,
 * n_groups.
 */

import { readFileSync } from "fs";
import Papa from "papaparse";

export interface AggregateRow {
  preset: string;
  d: number;
  c: number;
  timestep: number;
  surviving_fraction: number;
  mean_active_size: number;
  n_groups: number;
}

export const REQUIRED_COLUMNS = [
  "preset",
  "d",
  "c",
  "timestep",
  "surviving_fraction",
  "mean_active_size",
  "n_groups",
] as const;

const NUMERIC_COLUMNS = REQUIRED_COLUMNS.filter((c) => c !== "preset");

export class SchemaError extends Error {}

/** Parse aggregate CSV text, failing loudly with the offending column name. */
export function parseAggregate(text: string, source = "<input>"): AggregateRow[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new SchemaError(`${source}: malformed CSV at row ${e.row}: ${e.message}`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const col of REQUIRED_COLUMNS) {
    if (!fields.includes(col)) {
      throw new SchemaError(`${source}: missing required column "${col}"`);
    }
  }
  return parsed.data.map((raw, i) => {
    const row: Record<string, unknown> = { preset: raw.preset ?? "" };
    for (const col of NUMERIC_COLUMNS) {
      const v = Number(raw[col]);
      if (!Number.isFinite(v)) {
        throw new SchemaError(
          `${source}: row ${i + 1}: column "${col}" is not numeric (got ${JSON.stringify(raw[col])})`,
        );
      }
      row[col] = v;
    }
    return row as unknown as AggregateRow;
  });
}

export function loadAggregate(path: string): AggregateRow[] {
  return parseAggregate(readFileSync(path, "utf-8"), path);
}
