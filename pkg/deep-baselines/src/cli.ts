#!/usr/bin/env node
/**
 * deep-train: train a deep baseline on an exported `focuspipe-v1` dataset
 * CSV and write a harness-schema report.
 *
 *   deep-train --dataset <csv> --model <cnn|rnn|transformer> \
 *              --repeats 20 --seed 7 --report <dir> [--epochs N] [--lr F]
 *
 * One subject-dependent evaluation per (subject, session) group in the CSV;
 * report.csv, aggregate.json, and the echoed resolved configuration land in
 * the report directory. Exit code 0 on success, 2 on usage or data errors.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import yargs from "yargs";

import { readDataset } from "./data";
import { MODEL_KINDS, ModelKind } from "./models";
import { EvalReport, runSubjectDependent, writeAggregateJson, writeReportCsv } from "./protocol";
import { DEFAULT_CFG } from "./trainer";

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .option("dataset", { type: "string", demandOption: true, describe: "focuspipe-v1 CSV" })
    .option("model", {
      type: "string",
      demandOption: true,
      choices: MODEL_KINDS,
      describe: "baseline to train",
    })
    .option("repeats", { type: "number", default: 20 })
    .option("seed", { type: "number", default: DEFAULT_CFG.seed })
    .option("epochs", { type: "number", default: DEFAULT_CFG.epochs })
    .option("lr", { type: "number", default: DEFAULT_CFG.learningRate })
    .option("batch-size", { type: "number", default: DEFAULT_CFG.batchSize })
    .option("report", { type: "string", demandOption: true, describe: "output directory" })
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      throw err ?? new Error(msg);
    })
    .parse();

  const cfg = {
    learningRate: args.lr,
    epochs: args.epochs,
    batchSize: args["batch-size"],
    seed: args.seed,
  };
  fs.mkdirSync(args.report, { recursive: true });
  fs.writeFileSync(
    path.join(args.report, "deep_train_config.json"),
    JSON.stringify(
      {
        dataset: args.dataset,
        model: args.model,
        repeats: args.repeats,
        seed: args.seed,
        epochs: args.epochs,
        learning_rate: args.lr,
        batch_size: args["batch-size"],
      },
      null,
      1,
    ) + "\n",
  );

  const groups = readDataset(args.dataset);
  const reports: EvalReport[] = [];
  for (const group of groups) {
    const report = await runSubjectDependent(
      group,
      args.model as ModelKind,
      cfg,
      args.repeats,
    );
    reports.push(report);
    const accs = report.perRun.map((m) => m.accuracy);
    const meanAcc = accs.reduce((a, b) => a + b, 0) / accs.length;
    process.stdout.write(
      `${group.subjectId}/s${group.session} ${args.model}: mean accuracy ${meanAcc.toFixed(4)} over ${args.repeats} repeats\n`,
    );
  }
  writeReportCsv(reports, path.join(args.report, "report.csv"));
  writeAggregateJson(reports, path.join(args.report, "aggregate.json"));
  return 0;
}

if (require.main === module) {
  main(process.argv.slice(2))
    .then((code) => process.exit(code))
    .catch((err) => {
      process.stderr.write(`deep-train: ${err instanceof Error ? err.message : err}\n`);
      process.exit(2);
    });
}
