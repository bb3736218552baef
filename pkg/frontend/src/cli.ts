#!/usr/bin/env node
/**
 * figures — render sweep aggregate CSVs as bubble-chart figures.
 *
 * Usage:
 *   figures --input aggregate.csv --preset robustness --out fig2.png
 *   figures --input a.csv --input b.csv --out panels.svg   (side-by-side)
 *
 * Output format follows the --out extension: .svg writes the SVG document
 * directly; .png rasterizes it.
 */

import { writeFileSync } from "fs";
import { extname } from "path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { loadAggregate, SchemaError } from "./csv.js";
import { renderSvg, SelectionError } from "./figure.js";

async function main(): Promise<number> {
  const argv = await yargs(hideBin(process.argv))
    .option("input", {
      type: "string",
      array: true,
      demandOption: true,
      describe: "aggregate.csv path (repeat for side-by-side panels)",
    })
    .option("preset", {
      type: "string",
      default: "",
      describe: "keep only rows whose preset column matches",
    })
    .option("out", {
      type: "string",
      demandOption: true,
      describe: "output image path (.svg or .png)",
    })
    .option("title", {
      type: "string",
      array: true,
      describe: "panel title (repeat, parallel to --input)",
    })
    .option("bubble-scale", {
      type: "number",
      default: 9,
      describe: "radius in px of the reference-size bubble",
    })
    .strict()
    .help()
    .parse();

  const ext = extname(argv.out).toLowerCase();
  if (ext !== ".svg" && ext !== ".png") {
    throw new SelectionError(`unsupported output format "${ext}"; use .svg or .png`);
  }
  const svg = renderSvg({
    panels: argv.input.map((p) => loadAggregate(p)),
    titles: argv.title,
    preset: argv.preset,
    bubbleScale: argv["bubble-scale"],
  });
  if (ext === ".svg") {
    writeFileSync(argv.out, svg, "utf-8");
  } else {
    const sharp = (await import("sharp")).default;
    await sharp(Buffer.from(svg)).png().toFile(argv.out);
  }
  process.stderr.write(`wrote ${argv.out}\n`);
  return 0;
}

main().then(
  (code) => process.exit(code),
  (err) => {
    const kind =
      err instanceof SchemaError || err instanceof SelectionError
        ? "invalid input"
        : err?.code === "ENOENT"
          ? "missing file"
          : "error";
    process.stderr.write(`figures: ${kind}: ${err.message ?? err}\n`);
    process.exit(1);
  },
);
