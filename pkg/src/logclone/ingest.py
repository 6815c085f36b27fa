"""Corpus ingestion: scan Java trees, extract methods, parse logging calls."""

from __future__ import annotations

import fnmatch
import json
import logging
import os
import re
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .lexer import IDENT, KEYWORD, OP, STRING, Token, string_value, tokenize

logger = logging.getLogger(__name__)

LEVELS = ("trace", "debug", "info", "warn", "error", "fatal")
VAR_TOKEN = "<var>"
LOG_AWARE = "log_aware"
FULL = "full"

DEFAULT_LOGGER_PATTERNS = (r"[a-z0-9_$]*log(ger)?",)

_MODIFIERS = frozenset(
    "public private protected static final abstract synchronized native strictfp default transient volatile".split()
)
_PRIMITIVES = frozenset("void boolean byte char short int long float double var".split())
_PLACEHOLDER_RE = re.compile(r"\{\d*\}")
_ESCAPE_RE = re.compile(r"\\(?:u[0-9a-fA-F]{4}|[0-7]{1,3}|.)")
_CAMEL_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")
_WORD_RE = re.compile("[A-Za-z0-9]+|\x00")


class CorpusError(Exception):
    """Raised when a corpus root or corpus file cannot be read."""


@dataclass
class IngestConfig:
    extensions: tuple[str, ...] = (".java",)
    exclude: tuple[str, ...] = ()
    min_method_lines: int = 3
    logger_patterns: tuple[str, ...] = DEFAULT_LOGGER_PATTERNS
    levels: tuple[str, ...] = LEVELS
    split_camel_case: bool = True
    jobs: int = 1

    def logger_regex(self) -> re.Pattern:
        return re.compile("|".join(f"(?:{p})" for p in self.logger_patterns), re.IGNORECASE)


@dataclass
class SourceFile:
    file_id: str
    path: str
    content: str
    line_index: list[int] = field(default_factory=list)

    @classmethod
    def from_text(cls, file_id: str, path: str, content: str) -> "SourceFile":
        offsets, pos = [], 0
        for line in content.splitlines(keepends=True):
            offsets.append(pos)
            pos += len(line)
        return cls(file_id, path, content, offsets)


@dataclass
class LogPrintStatement:
    lps_id: str
    method_id: str
    line: int
    level: str
    raw_call: str
    lsd_tokens: list[str]
    variables: list[str]
    placeholder_count: int
    # token index range [start, end) into the method's full token list
    span: tuple[int, int] = (0, 0)

    def to_json(self) -> dict:
        return {
            "lps_id": self.lps_id,
            "line": self.line,
            "level": self.level,
            "lsd_tokens": self.lsd_tokens,
            "variables": self.variables,
            "raw_call": self.raw_call,
            "placeholder_count": self.placeholder_count,
            "span": list(self.span),
        }

    @classmethod
    def from_json(cls, method_id: str, rec: dict) -> "LogPrintStatement":
        return cls(
            lps_id=rec["lps_id"],
            method_id=method_id,
            line=rec["line"],
            level=rec["level"],
            raw_call=rec.get("raw_call", ""),
            lsd_tokens=list(rec["lsd_tokens"]),
            variables=list(rec["variables"]),
            placeholder_count=rec.get("placeholder_count", rec["lsd_tokens"].count(VAR_TOKEN)),
            span=tuple(rec.get("span", (0, 0))),
        )


@dataclass
class MethodDefinition:
    method_id: str
    file_id: str
    qualified_name: str
    start_line: int
    end_line: int
    raw_text: str
    tokens: list[str]  # body tokens; signature and outer braces excluded
    log_aware_tokens: list[str]
    lps_list: list[LogPrintStatement] = field(default_factory=list)
    # character range of the declaration itself inside raw_text
    span_start: int = 0
    span_end: int = 0

    @property
    def source(self) -> str:
        """Declaration text from the first header token to the closing brace."""
        return self.raw_text[self.span_start : self.span_end]

    @property
    def full_bag(self) -> Counter:
        return Counter(self.tokens)

    @property
    def log_aware_bag(self) -> Counter:
        return Counter(self.log_aware_tokens)

    @property
    def is_logged(self) -> bool:
        return bool(self.lps_list)

    @property
    def name(self) -> str:
        return self.qualified_name.rsplit(".", 1)[-1]

    def bag(self, mode: str) -> Counter:
        return tokenize_method(self, mode)

    def to_json(self) -> dict:
        return {
            "method_id": self.method_id,
            "file": self.file_id,
            "qualified_name": self.qualified_name,
            "start_line": self.start_line,
            "end_line": self.end_line,
            "tokens_full": self.tokens,
            "tokens_log_aware": self.log_aware_tokens,
            "lps": [p.to_json() for p in self.lps_list],
            "raw_text": self.raw_text,
            "span_start": self.span_start,
            "span_end": self.span_end,
        }

    @classmethod
    def from_json(cls, rec: dict) -> "MethodDefinition":
        mid = rec["method_id"]
        raw = rec.get("raw_text", "")
        return cls(
            method_id=mid,
            file_id=rec["file"],
            qualified_name=rec["qualified_name"],
            start_line=rec["start_line"],
            end_line=rec["end_line"],
            raw_text=raw,
            tokens=list(rec["tokens_full"]),
            log_aware_tokens=list(rec["tokens_log_aware"]),
            lps_list=[LogPrintStatement.from_json(mid, p) for p in rec["lps"]],
            span_start=rec.get("span_start", 0),
            span_end=rec.get("span_end", len(raw)),
        )


@dataclass
class SkipRecord:
    path: str
    reason: str


@dataclass
class Corpus:
    files: list[SourceFile] = field(default_factory=list)
    methods: list[MethodDefinition] = field(default_factory=list)
    skipped: list[SkipRecord] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        self._by_id = {m.method_id: m for m in self.methods}

    def __getitem__(self, method_id: str) -> MethodDefinition:
        return self._by_id[method_id]

    def __contains__(self, method_id: str) -> bool:
        return method_id in self._by_id

    def __len__(self) -> int:
        return len(self.methods)

    def subset(self, method_ids: Iterable[str]) -> "Corpus":
        keep = set(method_ids)
        return Corpus(methods=[m for m in self.methods if m.method_id in keep])


# ---------------------------------------------------------------------------
# scanning


def scan_corpus(root: str | os.PathLike, config: IngestConfig | None = None) -> Corpus:
    """Ingest every matching source file below ``root``.

    Files are visited in sorted path order; methods come out ordered by
    ``(path, start_line)``. Unreadable or undecodable files are skipped and
    recorded in ``Corpus.skipped``.
    """
    config = config or IngestConfig()
    root = Path(root)
    if not root.is_dir() or not os.access(root, os.R_OK | os.X_OK):
        raise CorpusError(f"cannot read corpus root: {root}")

    candidates: list[str] = []
    skipped: list[SkipRecord] = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in sorted(filenames):
            rel = Path(dirpath, name).relative_to(root).as_posix()
            if not name.endswith(tuple(config.extensions)):
                skipped.append(SkipRecord(rel, "extension"))
            elif any(fnmatch.fnmatch(rel, pat) for pat in config.exclude):
                skipped.append(SkipRecord(rel, "excluded"))
            else:
                candidates.append(rel)
    candidates.sort()

    files: list[SourceFile] = []
    for rel in candidates:
        try:
            content = (root / rel).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            logger.warning("skipping %s: %s", rel, exc)
            skipped.append(SkipRecord(rel, f"unreadable: {exc.__class__.__name__}"))
            continue
        files.append(SourceFile.from_text(rel, str(root / rel), content))

    if config.jobs > 1 and len(files) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_extract_with_warnings, files, [config] * len(files)))
    else:
        results = [_extract_with_warnings(f, config) for f in files]

    methods: list[MethodDefinition] = []
    warnings: list[str] = []
    for found, warns in results:
        methods.extend(found)
        warnings.extend(warns)
    skipped.sort(key=lambda s: s.path)
    return Corpus(files=files, methods=methods, skipped=skipped, warnings=warnings)


def load_source(path: str | os.PathLike, file_id: str | None = None) -> SourceFile:
    path = Path(path)
    try:
        content = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    return SourceFile.from_text(file_id or path.name, str(path), content)


def _extract_with_warnings(file: SourceFile, config: IngestConfig) -> tuple[list[MethodDefinition], list[str]]:
    warnings: list[str] = []
    return extract_methods(file, config, warnings), warnings


# ---------------------------------------------------------------------------
# method extraction


def _match_close(tokens: Sequence[Token], open_idx: int, open_text: str, close_text: str) -> int | None:
    depth = 0
    for k in range(open_idx, len(tokens)):
        text = tokens[k].text
        if tokens[k].kind != OP:
            continue
        if text == open_text:
            depth += 1
        elif text == close_text:
            depth -= 1
            if depth == 0:
                return k
    return None


def _looks_like_declaration(tokens: Sequence[Token], i: int, class_name: str | None) -> bool:
    tok = tokens[i]
    if tok.kind != IDENT or i + 1 >= len(tokens) or tokens[i + 1].text != "(":
        return False
    if i == 0:
        return False
    prev = tokens[i - 1]
    if prev.kind == IDENT or prev.text in (">", "]"):
        return True
    if prev.kind == KEYWORD:
        return prev.text in _MODIFIERS or prev.text in _PRIMITIVES
    # package-private constructor
    return prev.text in (";", "{", "}") and tok.text == class_name


def _header_start(tokens: Sequence[Token], name_idx: int) -> int:
    j = name_idx - 1
    while j >= 0 and tokens[j].text not in (";", "{", "}"):
        j -= 1
    start = j + 1
    # leading annotations are not part of the method's code
    while start < name_idx and tokens[start].text == "@":
        k = start + 2
        while k + 1 < name_idx and tokens[k].text == "." and tokens[k + 1].kind == IDENT:
            k += 2
        if k < name_idx and tokens[k].text == "(":
            close = _match_close(tokens, k, "(", ")")
            if close is None or close >= name_idx:
                break
            k = close + 1
        start = k
    return start


def _body_open(tokens: Sequence[Token], close_paren: int) -> int | None:
    """Index of the body's ``{`` after a parameter list, or None for abstract/calls."""
    j = close_paren + 1
    # array dims on legacy declarations: int foo()[]
    while j < len(tokens) and tokens[j].text in ("[", "]"):
        j += 1
    if j < len(tokens) and tokens[j].text == "throws":
        j += 1
        while j < len(tokens) and (tokens[j].kind == IDENT or tokens[j].text in (".", ",", "<", ">", "?", "@")):
            j += 1
    if j < len(tokens) and tokens[j].text == "{":
        return j
    return None


def method_id_for(file_id: str, line: int, col: int) -> str:
    return f"{file_id}:L{line:05d}C{col:03d}"


def extract_methods(
    file: SourceFile, config: IngestConfig | None = None, warnings: list[str] | None = None
) -> list[MethodDefinition]:
    """Find method and constructor bodies in ``file``.

    Signatures are recognized by token pattern, bodies by balanced-brace
    tracking over the lexed stream; bodies of local and anonymous classes
    stay inside their enclosing method. On an unbalanced body the methods
    found so far are returned and a warning is appended to ``warnings``.
    """
    config = config or IngestConfig()
    content = file.content
    tokens = tokenize(content)
    lines = content.splitlines(keepends=True)
    line_start = file.line_index or SourceFile.from_text("", "", content).line_index

    methods: list[MethodDefinition] = []
    class_stack: list[tuple[str, int]] = []
    pending_class: str | None = None
    depth = 0
    i, n = 0, len(tokens)
    while i < n:
        tok = tokens[i]
        text = tok.text
        if (
            tok.kind == KEYWORD
            and text in ("class", "interface", "enum", "record")
            and i + 1 < n
            and tokens[i + 1].kind == IDENT
            and (i == 0 or tokens[i - 1].text != ".")
        ):
            pending_class = tokens[i + 1].text
        elif tok.kind == OP and text == "{":
            depth += 1
            if pending_class is not None:
                class_stack.append((pending_class, depth))
                pending_class = None
        elif tok.kind == OP and text == "}":
            if class_stack and class_stack[-1][1] == depth:
                class_stack.pop()
            depth -= 1
        elif tok.kind == IDENT and pending_class is None:
            current = class_stack[-1][0] if class_stack else None
            if _looks_like_declaration(tokens, i, current):
                close_paren = _match_close(tokens, i + 1, "(", ")")
                body = _body_open(tokens, close_paren) if close_paren is not None else None
                if body is not None:
                    end = _match_close(tokens, body, "{", "}")
                    if end is None:
                        msg = f"{file.file_id}: unbalanced braces in {tok.text} at line {tok.line}"
                        logger.warning(msg)
                        if warnings is not None:
                            warnings.append(msg)
                        break
                    start = _header_start(tokens, i)
                    method = _build_method(file, tokens, lines, line_start, start, end, class_stack, tok.text, config)
                    if method.end_line - method.start_line + 1 >= config.min_method_lines:
                        methods.append(method)
                    i = end + 1
                    continue
        i += 1
    return methods


def _build_method(file, tokens, lines, line_start, start, end, class_stack, name, config) -> MethodDefinition:
    first, last = tokens[start], tokens[end]
    start_line, end_line = first.line, last.line
    slice_begin = line_start[start_line - 1]
    raw_text = "".join(lines[start_line - 1 : end_line])
    qualified = ".".join([c for c, _ in class_stack] + [name])
    col = first.start - slice_begin
    method = MethodDefinition(
        method_id=method_id_for(file.file_id, start_line, col),
        file_id=file.file_id,
        qualified_name=qualified,
        start_line=start_line,
        end_line=end_line,
        raw_text=raw_text,
        tokens=[],
        log_aware_tokens=[],
        span_start=col,
        span_end=last.end - slice_begin,
    )
    _populate(method, config)
    return method


def _populate(method: MethodDefinition, config: IngestConfig) -> None:
    """Fill body tokens, LPS list and log-aware tokens from ``method.source``."""
    toks = _method_tokens(method)
    method.tokens = [t.bag_text for t in toks]
    method.lps_list = detect_and_parse_lps(method, config, toks)
    masked = set()
    for p in method.lps_list:
        masked.update(range(*p.span))
    method.log_aware_tokens = [t for k, t in enumerate(method.tokens) if k not in masked]


def _method_tokens(method: MethodDefinition) -> list[Token]:
    """Tokens strictly inside the method's body braces, with file-relative lines."""
    prefix = method.raw_text[: method.span_start]
    line0 = method.start_line + prefix.count("\n") - 1
    toks = tokenize(method.source)
    parens = 0
    for k, t in enumerate(toks):
        if t.kind != OP:
            continue
        if t.text == "(":
            parens += 1
        elif t.text == ")":
            parens -= 1
        elif t.text == "{" and parens == 0:
            return [Token(t.kind, t.text, t.start, t.end, t.line + line0) for t in toks[k + 1 : -1]]
    return []


# ---------------------------------------------------------------------------
# logging statements


def normalize_description(text: str, split_camel_case: bool = True) -> list[str]:
    """Turn the quoted part of a log message into lowercase word tokens.

    ``{}`` placeholders become ``<var>``; escapes and punctuation are dropped.
    """
    text = _ESCAPE_RE.sub(" ", text)
    text = _PLACEHOLDER_RE.sub(" \x00 ", text)
    if split_camel_case:
        text = _CAMEL_RE.sub(" ", text)
    return [VAR_TOKEN if w == "\x00" else w.lower() for w in _WORD_RE.findall(text)]


def _split_top_level(tokens: Sequence[Token], sep: str) -> list[list[Token]]:
    parts: list[list[Token]] = [[]]
    depth = 0
    for t in tokens:
        if t.kind == OP and t.text in ("(", "[", "{"):
            depth += 1
        elif t.kind == OP and t.text in (")", "]", "}"):
            depth -= 1
        if depth == 0 and t.kind == OP and t.text == sep:
            parts.append([])
        else:
            parts[-1].append(t)
    if parts == [[]]:
        return []
    return parts


def _expr_text(source: str, toks: Sequence[Token]) -> str:
    return " ".join(source[toks[0].start : toks[-1].end].split())


def detect_and_parse_lps(
    method: MethodDefinition, config: IngestConfig | None = None, tokens: list[Token] | None = None
) -> list[LogPrintStatement]:
    """Find every ``<logger>.<level>(...)`` call in the method, at any depth."""
    config = config or IngestConfig()
    toks = tokens if tokens is not None else _method_tokens(method)
    source = method.source
    receiver_re = config.logger_regex()
    levels = set(config.levels)
    found: list[LogPrintStatement] = []
    i, n = 0, len(toks)
    while i + 3 < n:
        t = toks[i]
        if not (
            t.kind == IDENT
            and receiver_re.fullmatch(t.text)
            and toks[i + 1].text == "."
            and toks[i + 2].text in levels
            and toks[i + 3].text == "("
        ):
            i += 1
            continue
        close = _match_close(toks, i + 3, "(", ")")
        if close is None:
            break
        start = i
        # qualified receivers such as this.log or Outer.LOG belong to the call
        while start >= 2 and toks[start - 1].text == "." and (toks[start - 2].kind == IDENT or toks[start - 2].text == "this"):
            start -= 2
        end = close + 1
        if end < n and toks[end].text == ";":
            end += 1
        lsd, variables = _parse_arguments(toks[i + 4 : close], source, config)
        found.append(
            LogPrintStatement(
                lps_id=f"{method.method_id}/{len(found)}",
                method_id=method.method_id,
                line=t.line,
                level=toks[i + 2].text,
                raw_call=source[toks[start].start : toks[end - 1].end],
                lsd_tokens=lsd,
                variables=variables,
                placeholder_count=lsd.count(VAR_TOKEN),
                span=(start, end),
            )
        )
        i = end
    return found


def _parse_arguments(args: Sequence[Token], source: str, config: IngestConfig) -> tuple[list[str], list[str]]:
    arguments = _split_top_level(args, ",")
    if not arguments or not arguments[0]:
        return [], [_expr_text(source, a) for a in arguments[1:] if a]
    first, rest = arguments[0], arguments[1:]
    fragments = _split_top_level(first, "+")
    lsd: list[str] = []
    variables: list[str] = []
    if not any(len(f) == 1 and f[0].kind == STRING for f in fragments):
        lsd = [VAR_TOKEN]
        variables.append(_expr_text(source, first))
    else:
        for frag in fragments:
            if not frag:
                continue
            if len(frag) == 1 and frag[0].kind == STRING:
                lsd.extend(normalize_description(string_value(frag[0].text), config.split_camel_case))
            else:
                lsd.append(VAR_TOKEN)
                variables.append(_expr_text(source, frag))
    variables.extend(_expr_text(source, a) for a in rest if a)
    return lsd, variables


def tokenize_method(method: MethodDefinition, mode: str = FULL) -> Counter:
    """Token multiset of a method; ``log_aware`` drops every token inside an LPS call."""
    if mode in (LOG_AWARE, "log-aware"):
        return Counter(method.log_aware_tokens)
    if mode in (FULL, "log_unaware", "log-unaware"):
        return Counter(method.tokens)
    raise ValueError(f"unknown tokenization mode: {mode!r}")


def strip_logging(method: MethodDefinition) -> MethodDefinition:
    """Copy of ``method`` whose full token list has its LPS calls removed."""
    return MethodDefinition(
        method_id=method.method_id,
        file_id=method.file_id,
        qualified_name=method.qualified_name,
        start_line=method.start_line,
        end_line=method.end_line,
        raw_text=method.raw_text,
        tokens=list(method.log_aware_tokens),
        log_aware_tokens=list(method.log_aware_tokens),
        lps_list=[],
        span_start=method.span_start,
        span_end=method.span_end,
    )


# ---------------------------------------------------------------------------
# corpus file


def write_corpus(corpus: Corpus, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for m in corpus.methods:
            fh.write(json.dumps(m.to_json(), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def read_corpus(path: str | os.PathLike) -> Corpus:
    try:
        with open(path, encoding="utf-8") as fh:
            methods = [MethodDefinition.from_json(json.loads(line)) for line in fh if line.strip()]
    except (OSError, ValueError, KeyError) as exc:
        raise CorpusError(f"cannot load corpus {path}: {exc}") from exc
    return Corpus(methods=methods)


def ingest_text(text: str, file_id: str = "<memory>.java", config: IngestConfig | None = None) -> list[MethodDefinition]:
    """Extract methods from an in-memory Java snippet."""
    return extract_methods(SourceFile.from_text(file_id, file_id, text), config)
