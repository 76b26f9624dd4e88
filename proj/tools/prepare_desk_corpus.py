#!/usr/bin/env python3
# Copyright 2026 The muse-embed Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Turn a directory of plain-text books into a one-sentence-per-line corpus.

Lowercases, keeps alphabetic word tokens (with inner apostrophes), and splits
sentences at . ! and ?. Used to build tests/data/desk_corpus.txt.gz from
the public-domain Shakespeare texts shipped in the `shakespeare` sdist:

    pip download --no-deps shakespeare==0.6 && tar xzf shakespeare-0.6.tar.gz
    python3 tools/prepare_desk_corpus.py shakespeare-0.6/shksprdata/texts \
        --exclude-suffix _gut_f.txt | gzip -9 -n > tests/data/desk_corpus.txt.gz
"""
import argparse
import pathlib
import re
import sys

WORD = re.compile(r"[a-z]+(?:'[a-z]+)*|[.!?]")
STOP = {".", "!", "?"}


def sentences(text):
    current = []
    for tok in WORD.findall(text.lower()):
        if tok in STOP:
            if current:
                yield current
            current = []
        else:
            current.append(tok)
    if current:
        yield current


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("root")
    ap.add_argument("--exclude-suffix", action="append", default=[])
    ap.add_argument("--min-tokens", type=int, default=1)
    args = ap.parse_args()
    files = sorted(p for p in pathlib.Path(args.root).glob("*.txt")
                   if p.name != "metadata.txt"
                   and not any(p.name.endswith(s) for s in args.exclude_suffix))
    out = sys.stdout
    for path in files:
        text = path.read_text(encoding="utf-8", errors="replace")
        for sent in sentences(text):
            if len(sent) >= args.min_tokens:
                out.write(" ".join(sent))
                out.write("\n")


if __name__ == "__main__":
    main()
