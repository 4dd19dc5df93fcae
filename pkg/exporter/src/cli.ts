#!/usr/bin/env node
/**
 * Usage:
 *   cli.js export --adapter <name> --manifest <file> --plan <file> --out <dir> [--seed <n>]
 *   cli.js reverse-plan --plan <file> --out <file>
 *
 * `export` prints a JSON summary ({records, skipped, data_sha256}) on stdout
 * and exits nonzero if any video had to be skipped.
 */

import { getAdapter } from './adapters';
import { exportEmbeddings } from './export';
import { readManifest, readPlanFile, writePlanFile } from './formats';
import { reversePlan } from './reverse';

const parseFlags = (argv: string[]): Record<string, string> => {
  const flags: Record<string, string> = {};
  for (let i = 0; i < argv.length; i += 2) {
    if (!argv[i].startsWith('--') || argv[i + 1] === undefined) {
      throw new Error(`bad argument ${argv[i]}`);
    }
    flags[argv[i].slice(2)] = argv[i + 1];
  }
  return flags;
};

const required = (flags: Record<string, string>, name: string): string => {
  const value = flags[name];
  if (value === undefined) throw new Error(`missing --${name}`);
  return value;
};

const main = (): number => {
  const [command, ...rest] = process.argv.slice(2);
  const flags = parseFlags(rest);

  if (command === 'export') {
    const adapter = getAdapter(required(flags, 'adapter'));
    const manifest = readManifest(required(flags, 'manifest'));
    const plan = readPlanFile(required(flags, 'plan'));
    const seed = flags.seed !== undefined ? Number(flags.seed) : 0;
    const result = exportEmbeddings(manifest, plan, adapter, required(flags, 'out'), seed);
    process.stdout.write(
      JSON.stringify({
        records: result.records,
        skipped: result.skipped,
        data_sha256: result.dataSha256,
      }) + '\n',
    );
    if (result.skipped.length > 0) {
      process.stderr.write(`skipped ${result.skipped.length} video(s)\n`);
      return 1;
    }
    return 0;
  }

  if (command === 'reverse-plan') {
    const plan = readPlanFile(required(flags, 'plan'));
    writePlanFile(required(flags, 'out'), reversePlan(plan));
    return 0;
  }

  process.stderr.write('usage: cli.js <export|reverse-plan> [flags]\n');
  return 2;
};

try {
  process.exit(main());
} catch (err) {
  process.stderr.write(`error: ${(err as Error).message}\n`);
  process.exit(1);
}
