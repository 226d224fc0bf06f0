/** Key-value persistence boundary so the library stays editor-agnostic.
 * A VS Code adapter would back this with Memento; tests use memory or a
 * JSON file on disk. */

export interface KeyValueStore {
  get(key: string): string | undefined;
  set(key: string, value: string): void;
}

export class MemoryStore implements KeyValueStore {
  private data = new Map<string, string>();

  get(key: string): string | undefined {
    return this.data.get(key);
  }

  set(key: string, value: string): void {
    this.data.set(key, value);
  }
}

import * as fs from "node:fs";

/** Whole-file JSON store; every set rewrites the file. Fine for the tiny
 * amounts of state the companion keeps (an id and a short queue). */
export class JsonFileStore implements KeyValueStore {
  constructor(private readonly path: string) {}

  private load(): Record<string, string> {
    try {
      return JSON.parse(fs.readFileSync(this.path, "utf-8"));
    } catch {
      return {};
    }
  }

  get(key: string): string | undefined {
    return this.load()[key];
  }

  set(key: string, value: string): void {
    const data = this.load();
    data[key] = value;
    fs.writeFileSync(this.path, JSON.stringify(data));
  }
}

const INSTALLATION_KEY = "thanksd.installation_id";

import * as crypto from "node:crypto";

/** Random, locally persisted, content-free installation id. Generated
 * once; never derived from anything user-identifying. */
export function installationId(store: KeyValueStore): string {
  let id = store.get(INSTALLATION_KEY);
  if (!id) {
    id = crypto.randomBytes(16).toString("hex");
    store.set(INSTALLATION_KEY, id);
  }
  return id;
}
