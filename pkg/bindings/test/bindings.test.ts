import { execFileSync } from "node:child_process";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import {
  convert,
  lintJson,
  LlmonCliError,
  maskJson,
  parseTreeJson,
  tokenizeJson,
} from "../src/index.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");
const read = (name: string) => readFileSync(join(FIXTURES, name), "utf8");

const INTRO = read("g_llmon_intro.lmn");
const EXEC_NOARGS = read("g_exec_noargs.lmn");

function cli(args: string[], input: string): string {
  return execFileSync("llmon", args, { input, encoding: "utf8" });
}

describe("convert", () => {
  it("turns the intro document into its machine form, equal to the CLI", () => {
    const out = convert(INTRO, "llmon", "mrllmon");
    expect(out).toBe(cli(["convert", "-", "--from", "surface", "--to", "machine"], INTRO));
    expect(out).toContain("<|open|>instruction<|close|>");
  });

  it("keeps bare text bare", () => {
    expect(convert("hi", "llmon", "mrllmon").trim()).toBe("hi");
  });

  it("round trips JSON through llmon text", () => {
    const src = '{"GPA": 3.4, "tags": ["a", "2"]}';
    const lmn = convert(src, "json", "llmon");
    expect(lmn).toContain("float");
    const back = convert(lmn, "llmon", "json");
    expect(JSON.parse(back)).toEqual(JSON.parse(src));
  });

  it("honors the compact style", () => {
    const out = convert(EXEC_NOARGS, "llmon", "llmon", { style: "compact" });
    expect(out.trim()).not.toContain("\n");
    expect(out).not.toBe(convert(EXEC_NOARGS, "llmon", "llmon"));
  });

  it("reports untranslatable documents with the library code", () => {
    expect.assertions(3);
    try {
      convert(EXEC_NOARGS, "llmon", "json");
    } catch (err) {
      const e = err as LlmonCliError;
      expect(e).toBeInstanceOf(LlmonCliError);
      expect(e.code).toBe("UNTRANSLATABLE_NODE");
      expect(e.exitCode).toBe(1);
    }
  });

  it("carries the byte offset on parse failures", () => {
    expect.assertions(2);
    try {
      convert("text \\a\\ never closed", "llmon", "mrllmon");
    } catch (err) {
      const e = err as LlmonCliError;
      expect(e.code).toBe("UNCLOSED_TAG");
      expect(e.byteOffset).not.toBeNull();
    }
  });
});

describe("parseTreeJson", () => {
  it("returns the tree with roots and byte spans", () => {
    const tree = JSON.parse(parseTreeJson(INTRO));
    expect(tree.roots.map((r: { tag: string }) => r.tag)).toEqual([
      "instruction",
      "data",
    ]);
    expect(tree.spans).toBeDefined();
  });

  it("accepts machine text under an explicit format", () => {
    const mrl = convert(EXEC_NOARGS, "llmon", "mrllmon");
    const tree = JSON.parse(parseTreeJson(mrl, { format: "mrllmon" }));
    expect(tree.roots.at(-1).tag).toBe("exec:x");
  });

  it("applies strict literals", () => {
    const tree = JSON.parse(
      parseTreeJson("\\n\\ 42 /n/", { strictLiterals: true }),
    );
    expect(tree.roots[0].children[0].kind).toBe("integer");
  });
});

describe("lintJson", () => {
  it("returns an empty report for a clean document", () => {
    expect(lintJson(INTRO)).toBe("");
  });

  it("returns findings as JSON lines without throwing", () => {
    const dup = "\\data:1\\ a /data:1/\n\\data:1\\ b /data:1/";
    const lines = lintJson(dup).trim().split("\n").map((l) => JSON.parse(l));
    expect(lines[0].code).toBe("DUP_INSTANCE");
    expect(lines[0].severity).toBe("error");
  });

  it("still throws on unparseable input", () => {
    expect(() => lintJson("\\broken")).toThrow(LlmonCliError);
  });
});

describe("tokenizeJson", () => {
  it("is lossless over the machine form", () => {
    const mrl = convert(EXEC_NOARGS, "llmon", "mrllmon");
    const tokens = JSON.parse(tokenizeJson(mrl)) as { text: string; special: boolean }[];
    expect(tokens.map((t) => t.text).join("")).toBe(mrl);
    expect(tokens.some((t) => t.special)).toBe(true);
  });
});

describe("maskJson", () => {
  it("matches the CLI on the exec document", () => {
    const mrl = convert(EXEC_NOARGS, "llmon", "mrllmon");
    expect(maskJson(mrl)).toBe(cli(["mask", "-"], mrl));
    const mask = JSON.parse(maskJson(mrl));
    expect(mask.masked.length).toBeGreaterThan(0);
    expect(mask.scope).toBe("transitive");
  });

  it("masks nothing when the only instruction is the bound one", () => {
    const doc =
      "\\instr:a\\ only task /instr:a/\n" +
      "\\exec:x\\\n  \\instr\\ instr:a /instr/\n/exec:x/\n";
    const mrl = convert(doc, "llmon", "mrllmon");
    expect(JSON.parse(maskJson(mrl, "exec:x")).masked).toEqual([]);
  });

  it("verifies the exec ref when one is named", () => {
    const mrl = convert(EXEC_NOARGS, "llmon", "mrllmon");
    expect(JSON.parse(maskJson(mrl, "exec:x")).len).toBeGreaterThan(0);
    expect(() => maskJson(mrl, "exec:nope")).toThrowError(
      expect.objectContaining({ code: "DANGLING_REF" }),
    );
  });

  it("threads the policy flags through", () => {
    const mrl = convert(EXEC_NOARGS, "llmon", "mrllmon");
    const out = maskJson(mrl, null, { scope: "generation_only", maskFreeText: true });
    expect(out).toBe(
      cli(["mask", "-", "--scope", "generation_only", "--mask-free-text"], mrl),
    );
    expect(JSON.parse(out).scope).toBe("generation_only");
  });

  it("emits the expanded matrix", () => {
    const mrl = convert(EXEC_NOARGS, "llmon", "mrllmon");
    const m = JSON.parse(maskJson(mrl, null, { matrix: 4 }));
    expect(m.generated).toBe(4);
    expect(m.rows).toHaveLength(m.prompt_length + 4);
  });
});
