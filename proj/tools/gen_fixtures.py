# Copyright 2026 The runfuzz Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the program fixtures under fixtures/.

Usage: python3 tools/gen_fixtures.py [OUTDIR]
"""

import json
import pathlib
import sys


class Program:
    def __init__(self, entry):
        self.blocks = []
        self.edges = []
        self.guards = {}
        self.targets = {}
        self.locations = {}
        self.crash_rules = []
        self.seeds = []
        self.entry = entry
        self.block(entry)

    def block(self, name):
        if name not in self.blocks:
            self.blocks.append(name)
        return name

    def edge(self, src, dst, kind="cf"):
        self.block(src)
        self.block(dst)
        self.edges.append({"src": src, "dst": dst, "kind": kind})

    def call(self, src, callee):
        self.edge(src, callee, "call")

    def branch(self, b, offset, op, then, other, value=None, lo=None, hi=None):
        self.edge(b, then)
        self.edge(b, other)
        g = {"offset": offset, "op": op, "then": then, "else": other}
        if op == "range":
            g.update(lo=lo, hi=hi)
        else:
            g["value"] = value
        self.guards[b] = g

    def cases(self, b, cases, default):
        out = []
        for offset, op, arg, to in cases:
            self.edge(b, to)
            c = {"offset": offset, "op": op, "to": to}
            if op == "range":
                c["lo"], c["hi"] = arg
            else:
                c["value"] = arg
            out.append(c)
        self.edge(b, default)
        self.guards[b] = {"cases": out, "default": default}

    def doc(self):
        d = {
            "blocks": self.blocks,
            "entry": self.entry,
            "edges": self.edges,
            "guards": self.guards,
            "targets": self.targets,
        }
        if self.locations:
            d["locations"] = self.locations
        if self.crash_rules:
            d["crash_rules"] = self.crash_rules
        if self.seeds:
            d["seeds"] = self.seeds
        return d


def figure():
    # Control-flow graph from the critical-block example: targets 1 and 2.
    p = Program("A")
    p.branch("A", 0, "<", "B", "K", value=128)
    p.branch("B", 1, "<", "C", "D", value=128)
    p.branch("K", 2, "<", "2", "L", value=128)
    p.branch("C", 3, "<", "1", "H", value=128)
    p.branch("D", 4, "<", "F", "E", value=128)
    p.branch("F", 5, "<", "G", "I", value=128)
    p.branch("G", 6, "<", "1", "J", value=128)
    for b in ["H", "E", "L", "I", "J", "1", "2"]:
        p.block(b)
    p.targets = {"fig.c:1": ["1"], "fig.c:2": ["2"]}
    return p


def straight():
    p = Program("A")
    p.edge("A", "B")
    p.edge("B", "C")
    return p


def listing():
    # Target reached by a short input; the overflow needs a long one.
    p = Program("parse")
    p.branch("parse", 0, "==", "copy", "reject", value=ord("A"))
    p.branch("copy", 31, "!=", "overflow", "done", value=0)
    p.block("reject")
    p.block("overflow")
    p.block("done")
    p.targets = {"copy.c:12": ["copy"]}
    p.crash_rules = [{"block": "overflow"}]
    return p


def pta(magic_len=5, diamonds=40):
    """Uninitialized-pointer scenario.

    dump_bfd picks Mach-O on byte 0 == 'M'. The Mach-O synthetic-symtab
    reader checks a magic number and bails out on a mismatch; a full match
    reaches the allocation target. Any other format goes through
    slurp_symtab, a long run of easy branches.  Both then call
    disassemble_data, where two narrow range checks lead to the xmalloc
    target and a third one to compare_symbols, which dereferences the
    allocated symbols.  The crash only fires when the allocation ran first.
    """
    p = Program("dump_bfd")
    p.branch("dump_bfd", 0, "==", "macho_0", "slurp_0", value=ord("M"))

    magic = [0xFE, 0xED, 0xFA, 0xCE, 0xCF, 0x07, 0x01][:magic_len]
    for i, v in enumerate(magic):
        nxt = f"macho_{i + 1}" if i + 1 < len(magic) else "macho_alloc"
        p.branch(f"macho_{i}", 1 + i, "==", nxt, "macho_bail", value=v)
    p.block("macho_bail")
    p.edge("macho_alloc", "after_synth")

    for i in range(diamonds):
        b = f"slurp_{i}"
        off = 1 + (i % 15)
        thr = 32 + (i * 37) % 192
        p.branch(b, off, ">", f"slurp_{i}_a", f"slurp_{i}_b", value=thr)
        join = f"slurp_{i + 1}" if i + 1 < diamonds else "after_synth"
        p.edge(f"slurp_{i}_a", join)
        p.edge(f"slurp_{i}_b", join)

    p.call("after_synth", "dis_entry")
    p.edge("after_synth", "dump_end")
    p.block("dump_end")

    p.branch("dis_entry", 8, "range", "dis_d2", "dis_ret", lo=0x40, hi=0x43)
    p.branch("dis_d2", 9, "range", "dis_alloc", "dis_ret", lo=0x90, hi=0x93)
    p.call("dis_alloc", "xmalloc")
    p.edge("dis_alloc", "dis_d3")
    p.branch("dis_d3", 10, "range", "dis_sort", "dis_ret", lo=0x20, hi=0x23)
    p.call("dis_sort", "compare_symbols")
    p.edge("dis_sort", "dis_ret")
    p.block("dis_ret")

    p.edge("xmalloc", "xmalloc_ret")
    p.block("xmalloc_ret")
    p.edge("compare_symbols", "cs_deref")
    p.edge("cs_deref", "cs_ret")
    p.block("cs_ret")

    p.targets = {"mach-o.c:17": ["macho_alloc"], "xmalloc.c:34": ["xmalloc"]}
    p.locations = {"objdump.c:28": ["cs_deref"]}
    p.crash_rules = [{"block": "cs_deref", "requires": "macho_alloc"}]
    return p


def groups(n_groups=10, per_group=10, region_bytes=128):
    """Targets that always co-occur in groups.

    Byte 0 selects one group; the group runs its targets back to back and
    then enters a shared region of diamonds, eight per input byte, each
    taken when its byte holds exactly one particular set bit.
    """
    p = Program("main")
    width = 256 // n_groups
    cases = []
    for g in range(n_groups):
        lo, hi = g * width, (g + 1) * width - 1
        cases.append((0, "range", (lo, hi), f"g{g}_t0"))
    p.cases("main", cases, "reject")
    p.block("reject")
    for g in range(n_groups):
        for t in range(per_group):
            nxt = f"g{g}_t{t + 1}" if t + 1 < per_group else "region_0"
            p.edge(f"g{g}_t{t}", nxt)
            p.targets[f"group{g}.c:{100 + t}"] = [f"g{g}_t{t}"]
    diamonds = 8 * region_bytes
    for i in range(diamonds):
        b = f"region_{i}"
        nxt = f"region_{i + 1}" if i + 1 < diamonds else "region_end"
        p.branch(b, 1 + i // 8, "==", f"region_{i}_on", nxt, value=1 << (i % 8))
        p.edge(f"region_{i}_on", nxt)
    p.block("region_end")
    p.seeds = ["00" * (region_bytes + 1)]
    return p


def main():
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "fixtures")
    out.mkdir(parents=True, exist_ok=True)
    fixtures = {
        "figure.json": figure(),
        "straight.json": straight(),
        "listing.json": listing(),
        "pta.json": pta(),
        "groups.json": groups(),
    }
    for name, prog in fixtures.items():
        (out / name).write_text(json.dumps(prog.doc(), indent=1) + "\n")
    (out / "figure_covered.txt").write_text("A\nB\nC\nH\nD\nE\nK\n2\n")
    (out / "pta_targets.txt").write_text("mach-o.c:17\nxmalloc.c:34\n")


if __name__ == "__main__":
    main()
