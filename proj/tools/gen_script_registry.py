#!/usr/bin/env python3
# Copyright 2026 The xlit Authors.
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
"""Regenerates data/script_registry.tsv from the Python unicodedata tables.

Usage: tools/gen_script_registry.py > data/script_registry.tsv
"""

import sys
import unicodedata

FORMAT_VERSION = 1

# (id, first, last, brahmi)
SCRIPTS = [
    ("devanagari", 0x0900, 0x097F, True),
    ("bengali", 0x0980, 0x09FF, True),
    ("gurmukhi", 0x0A00, 0x0A7F, True),
    ("gujarati", 0x0A80, 0x0AFF, True),
    ("oriya", 0x0B00, 0x0B7F, True),
    ("tamil", 0x0B80, 0x0BFF, True),
    ("telugu", 0x0C00, 0x0C7F, True),
    ("kannada", 0x0C80, 0x0CFF, True),
    ("malayalam", 0x0D00, 0x0D7F, True),
    ("sinhala", 0x0D80, 0x0DFF, False),
    ("latin", 0x0000, 0x024F, False),
    ("arabic", 0x0600, 0x06FF, False),
    ("meetei", 0xABC0, 0xABFF, False),
]

# Offsets above this have no shared layout across the Indic blocks.
COORDINATED_LIMIT = 0x70

VOWEL_LETTERS = {
    "A", "AA", "I", "II", "U", "UU", "VOCALIC R", "VOCALIC RR", "VOCALIC L",
    "VOCALIC LL", "CANDRA A", "CANDRA E", "SHORT E", "E", "EE", "AI",
    "CANDRA O", "SHORT O", "O", "OO", "AU", "OE", "OOE", "AW", "UE", "UUE",
    "SHORT A",
}


def name_of(cp):
    try:
        return unicodedata.name(chr(cp))
    except ValueError:
        return None


def classify_indic(cp, name, cat):
    if cat == "Nd":
        return "Digit"
    if "VIRAMA" in name or "AL-LAKUNA" in name or "APUN IYEK" in name:
        return "Virama"
    if "NUKTA" in name:
        return "Nukta"
    if "VOWEL SIGN" in name or "LENGTH MARK" in name or "PRISHTHAMATRA" in name:
        return "VowelSign"
    if name.startswith("GURMUKHI IRI") or name.startswith("GURMUKHI URA"):
        return "IndependentVowel"
    if 0x0D85 <= cp <= 0x0D96:
        return "IndependentVowel"
    if 0x0D9A <= cp <= 0x0DC6:
        return "Consonant"
    if "LETTER" in name and cat == "Lo":
        tail = name.split(" LETTER ", 1)[1] if " LETTER " in name else ""
        if tail in VOWEL_LETTERS or tail in ("UN", "ATIYA"):
            return "IndependentVowel"
        return "Consonant"
    if cat in ("Mn", "Mc"):
        return "Sign"
    if "AVAGRAHA" in name:
        return "Sign"
    return "Other"


def classify_latin(cp, name, cat):
    ch = chr(cp)
    if ch.isspace():
        return "Whitespace"
    if cat == "Nd":
        return "Digit"
    if cat.startswith("L"):
        base = unicodedata.normalize("NFD", ch)[0].lower()
        return "IndependentVowel" if base in "aeiou" else "Consonant"
    return "Other"


def classify_arabic(cp, name, cat):
    if cat == "Nd":
        return "Digit"
    if cat in ("Mn", "Mc"):
        return "VowelSign"
    if cat == "Lo":
        return "Consonant"
    return "Other"


def assigned(cp):
    return name_of(cp) is not None or (cp < 0x20) or cp == 0x7F


def main():
    out = sys.stdout
    out.write("# xlit script registry: code point, script, class, mappable\n")
    out.write(f"# generated by tools/gen_script_registry.py (unicodedata {unicodedata.unidata_version})\n")
    out.write(f"@version\t{FORMAT_VERSION}\n")
    for sid, first, last, brahmi in SCRIPTS:
        out.write(f"@script\t{sid}\t{first:04X}\t{last:04X}\t{'brahmi' if brahmi else 'other'}\n")
    for sid, first, last, brahmi in SCRIPTS:
        for cp in range(first, last + 1):
            if not assigned(cp):
                continue
            name = name_of(cp) or ""
            cat = unicodedata.category(chr(cp))
            if sid == "latin":
                cls = classify_latin(cp, name, cat)
            elif sid == "arabic":
                cls = classify_arabic(cp, name, cat)
            else:
                cls = classify_indic(cp, name, cat)
            mappable = 0
            if brahmi:
                off = cp - first
                if off < COORDINATED_LIMIT and assigned(0x0900 + off):
                    mappable = 1
            out.write(f"{cp:04X}\t{sid}\t{cls}\t{mappable}\n")


if __name__ == "__main__":
    main()
