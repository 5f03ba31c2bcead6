//! Text normalization ahead of lexical counting.
//!
//! Nine noise classes are collapsed into one placeholder token each so that
//! they cannot inflate lexical variety. Rules run in a fixed order over the
//! not-yet-replaced text; a replaced span becomes an opaque placeholder that
//! later rules never look into. The remaining text is split on whitespace.
//!
//! | class      | default       | matches                                                        |
//! |------------|---------------|----------------------------------------------------------------|
//! | `tag`      | `[TAG]`       | `<x ...>` / `</x ...>` spans, letter right after `<` or `</`   |
//! | `url`      | `[URL]`       | `scheme://...` or `www....` up to whitespace                   |
//! | `path`     | `[PATH]`      | chunks with ≥ 2 `/` or `\` and ≥ 2 non-empty segments          |
//! | `emoticon` | `[EMOTICON]`  | whole chunks from a fixed ASCII list, runs of emoji codepoints |
//! | `alnum`    | `[ALNUM]`     | chunks with ≥ 2 letters and ≥ 2 digits                         |
//! | `number`   | `[NUMBER]`    | ≥ 2 digits, optionally separated by whitespace, `.` or `-`     |
//! | `puncts`   | `[PUNCTS]`    | runs of ≥ 3 punctuation or symbol characters                   |
//! | `phonetic` | `[PHONETIC]`  | runs of IPA Extensions characters (U+0250..U+02AF)             |
//! | `nonfr`    | `[NONFR]`     | runs of characters outside printable ASCII, the configured     |
//! |            |               | French letters and common typographic punctuation              |
//!
//! A "chunk" is a maximal run of non-whitespace characters. Case is kept.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use regex::Regex;
use sha2::{Digest, Sha256};

use crate::counts::CategoryCounts;
use crate::error::{Error, Result};
use crate::kv::{self, KeyValues};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoiseClass {
    Tag,
    Url,
    Path,
    Emoticon,
    Alnum,
    Number,
    Puncts,
    Phonetic,
    NonFrench,
}

impl NoiseClass {
    /// Application order.
    pub const ORDER: [NoiseClass; 9] = [
        NoiseClass::Tag,
        NoiseClass::Url,
        NoiseClass::Path,
        NoiseClass::Emoticon,
        NoiseClass::Alnum,
        NoiseClass::Number,
        NoiseClass::Puncts,
        NoiseClass::Phonetic,
        NoiseClass::NonFrench,
    ];

    pub fn key(self) -> &'static str {
        match self {
            NoiseClass::Tag => "tag",
            NoiseClass::Url => "url",
            NoiseClass::Path => "path",
            NoiseClass::Emoticon => "emoticon",
            NoiseClass::Alnum => "alnum",
            NoiseClass::Number => "number",
            NoiseClass::Puncts => "puncts",
            NoiseClass::Phonetic => "phonetic",
            NoiseClass::NonFrench => "nonfr",
        }
    }

    pub fn default_placeholder(self) -> &'static str {
        match self {
            NoiseClass::Tag => "[TAG]",
            NoiseClass::Url => "[URL]",
            NoiseClass::Path => "[PATH]",
            NoiseClass::Emoticon => "[EMOTICON]",
            NoiseClass::Alnum => "[ALNUM]",
            NoiseClass::Number => "[NUMBER]",
            NoiseClass::Puncts => "[PUNCTS]",
            NoiseClass::Phonetic => "[PHONETIC]",
            NoiseClass::NonFrench => "[NONFR]",
        }
    }

    fn index(self) -> usize {
        NoiseClass::ORDER.iter().position(|&c| c == self).unwrap()
    }

    fn from_key(key: &str) -> Option<NoiseClass> {
        NoiseClass::ORDER.into_iter().find(|c| c.key() == key)
    }
}

pub const DEFAULT_FRENCH_LETTERS: &str = "àâæçéèêëîïôœùûüÿÀÂÆÇÉÈÊËÎÏÔŒÙÛÜŸ";

/// Typographic punctuation common in French text, allowed besides ASCII.
const FRENCH_PUNCTUATION: &[char] = &[
    '«', '»', '‹', '›', '‘', '’', '“', '”', '…', '–', '—', '°', '€', '·',
];

const ASCII_EMOTICONS: &[&str] = &[
    ":)", ":-)", ":(", ":-(", ";)", ";-)", ":D", ":-D", ":P", ":-P", ":p", ":-p", ":o", ":-o",
    ":O", ":-O", ":/", ":-/", ":|", ":-|", ":*", ":-*", ":'(", ":')", "<3", "</3", "xD", "XD",
    "^^", "^_^", "-_-", "o_O", "O_o", "T_T", ":3", "=)", "=(", "=D", "8)", "B)",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleConfig {
    pub enabled: bool,
    pub placeholder: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizerConfig {
    rules: [RuleConfig; 9],
    french_letters: String,
}

impl Default for NormalizerConfig {
    fn default() -> Self {
        NormalizerConfig {
            rules: NoiseClass::ORDER.map(|c| RuleConfig {
                enabled: true,
                placeholder: c.default_placeholder().to_string(),
            }),
            french_letters: DEFAULT_FRENCH_LETTERS.to_string(),
        }
    }
}

impl NormalizerConfig {
    pub fn rule(&self, class: NoiseClass) -> &RuleConfig {
        &self.rules[class.index()]
    }

    pub fn set_enabled(&mut self, class: NoiseClass, enabled: bool) {
        self.rules[class.index()].enabled = enabled;
    }

    pub fn set_placeholder(
        &mut self,
        class: NoiseClass,
        placeholder: impl Into<String>,
    ) -> Result<()> {
        self.rules[class.index()].placeholder = placeholder.into();
        self.validate()
    }

    pub fn french_letters(&self) -> &str {
        &self.french_letters
    }

    pub fn set_french_letters(&mut self, letters: impl Into<String>) -> Result<()> {
        self.french_letters = letters.into();
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeMap::new();
        for class in NoiseClass::ORDER {
            let p = &self.rule(class).placeholder;
            if p.is_empty() || p.chars().any(char::is_whitespace) {
                return Err(Error::Config(format!(
                    "placeholder for `{}` must be non-empty and contain no whitespace",
                    class.key()
                )));
            }
            if let Some(other) = seen.insert(p.clone(), class) {
                return Err(Error::Config(format!(
                    "`{}` and `{}` share placeholder `{p}`",
                    other.key(),
                    class.key()
                )));
            }
        }
        if self.french_letters.chars().any(char::is_whitespace) {
            return Err(Error::Config(
                "french_letters must not contain whitespace".into(),
            ));
        }
        Ok(())
    }

    /// True when `key` belongs to the normalizer section of a config file.
    pub fn is_key(key: &str) -> bool {
        if key == "rule_order" || key == "french_letters" {
            return true;
        }
        match key.split_once('.') {
            Some((class, field)) => {
                NoiseClass::from_key(class).is_some() && matches!(field, "enabled" | "placeholder")
            }
            None => false,
        }
    }

    /// Applies the normalizer keys found in `kv` on top of `self`; other
    /// keys are ignored.
    pub fn apply_kv(&mut self, kv: &KeyValues) -> Result<()> {
        for (key, value) in kv {
            if !Self::is_key(key) {
                continue;
            }
            if key == "rule_order" {
                if value.replace(' ', "") != rule_order_string() {
                    return Err(Error::Config(format!(
                        "rule_order is fixed to `{}`",
                        rule_order_string()
                    )));
                }
                continue;
            }
            if key == "french_letters" {
                self.french_letters = value.clone();
                continue;
            }
            let (class, field) = key.split_once('.').unwrap();
            let class = NoiseClass::from_key(class).unwrap();
            match field {
                "enabled" => self.set_enabled(class, kv::parse_bool(key, value)?),
                _ => self.rules[class.index()].placeholder = value.clone(),
            }
        }
        self.validate()
    }

    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let mut config = NormalizerConfig::default();
        config.apply_kv(kv)?;
        Ok(config)
    }

    /// Serialized form; the order of lines is fixed.
    pub fn to_kv_string(&self) -> String {
        let mut out = String::new();
        writeln!(out, "rule_order = {}", rule_order_string()).unwrap();
        for class in NoiseClass::ORDER {
            let r = self.rule(class);
            writeln!(out, "{}.enabled = {}", class.key(), r.enabled).unwrap();
            writeln!(out, "{}.placeholder = {}", class.key(), r.placeholder).unwrap();
        }
        writeln!(out, "french_letters = {}", self.french_letters).unwrap();
        out
    }

    /// Hex SHA-256 of [`to_kv_string`](Self::to_kv_string).
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_kv_string().as_bytes()))
    }
}

fn rule_order_string() -> String {
    NoiseClass::ORDER.map(|c| c.key()).join(",")
}

/// Whitespace-free, non-empty tokens after normalization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenSequence {
    tokens: Vec<String>,
}

impl TokenSequence {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.tokens
    }

    pub fn join(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }
}

/// Counts of each token form.
pub fn token_counts(seq: &TokenSequence) -> CategoryCounts {
    seq.iter().collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NormalizeStats {
    /// Spans replaced by a placeholder, including placeholders already
    /// present in the input.
    pub rule_matches: usize,
}

struct Patterns {
    tag: Regex,
    url: Regex,
    number: Regex,
    puncts: Regex,
    phonetic: Regex,
    emoji: Regex,
}

fn patterns() -> &'static Patterns {
    static PATTERNS: OnceLock<Patterns> = OnceLock::new();
    PATTERNS.get_or_init(|| Patterns {
        tag: Regex::new(r"</?[A-Za-z][^<>\n]*>").unwrap(),
        url: Regex::new(r"(?:[A-Za-z][A-Za-z0-9+.\-]*://|www\.)\S*").unwrap(),
        number: Regex::new(r"[0-9](?:(?:\s+|[.\-])?[0-9])+").unwrap(),
        puncts: Regex::new(r"[\p{P}\p{S}]{3,}").unwrap(),
        phonetic: Regex::new(r"[\x{0250}-\x{02AF}]+").unwrap(),
        emoji: Regex::new(
            r"[\x{1F000}-\x{1FAFF}\x{2600}-\x{27BF}\x{2B00}-\x{2BFF}\x{FE0F}\x{200D}]+",
        )
        .unwrap(),
    })
}

enum Segment {
    Text(String),
    Mark(NoiseClass),
}

/// A compiled normalizer. Cheap to share across threads.
#[derive(Debug, Clone)]
pub struct Normalizer {
    config: NormalizerConfig,
    french: Vec<char>,
    literal: Option<Regex>,
    literal_classes: BTreeMap<String, NoiseClass>,
}

impl Normalizer {
    pub fn new(config: NormalizerConfig) -> Result<Self> {
        config.validate()?;
        let mut french: Vec<char> = config.french_letters.chars().collect();
        french.sort_unstable();
        french.dedup();
        let mut literal_classes = BTreeMap::new();
        for class in NoiseClass::ORDER {
            let r = config.rule(class);
            if r.enabled {
                literal_classes.insert(r.placeholder.clone(), class);
            }
        }
        let literal = if literal_classes.is_empty() {
            None
        } else {
            // longest first so that no placeholder shadows a longer one
            let mut alts: Vec<&String> = literal_classes.keys().collect();
            alts.sort_by_key(|s| std::cmp::Reverse(s.len()));
            let pattern = alts
                .iter()
                .map(|s| regex::escape(s))
                .collect::<Vec<_>>()
                .join("|");
            Some(Regex::new(&pattern).map_err(|e| Error::Config(e.to_string()))?)
        };
        Ok(Normalizer {
            config,
            french,
            literal,
            literal_classes,
        })
    }

    pub fn config(&self) -> &NormalizerConfig {
        &self.config
    }

    pub fn normalize(&self, text: &str) -> TokenSequence {
        self.normalize_with_stats(text).0
    }

    /// Like [`normalize`](Self::normalize) for raw bytes; invalid UTF-8
    /// sequences become the `nonfr` placeholder.
    pub fn normalize_bytes(&self, bytes: &[u8]) -> TokenSequence {
        self.normalize(&String::from_utf8_lossy(bytes))
    }

    pub fn normalize_with_stats(&self, text: &str) -> (TokenSequence, NormalizeStats) {
        let mut stats = NormalizeStats::default();
        let mut segments = vec![Segment::Text(text.to_string())];

        if let Some(literal) = &self.literal {
            segments = split_segments(segments, &mut stats, |t| {
                literal
                    .find_iter(t)
                    .map(|m| (m.start(), m.end(), self.literal_classes[m.as_str()]))
                    .collect()
            });
        }

        for class in NoiseClass::ORDER {
            if !self.config.rule(class).enabled {
                continue;
            }
            segments = split_segments(segments, &mut stats, |t| {
                self.find_spans(class, t)
                    .into_iter()
                    .map(|(s, e)| (s, e, class))
                    .collect()
            });
        }

        let emoticons = self.config.rule(NoiseClass::Emoticon).enabled;
        let mut tokens = Vec::new();
        for seg in segments {
            match seg {
                Segment::Mark(class) => tokens.push(self.config.rule(class).placeholder.clone()),
                Segment::Text(t) => {
                    for tok in t.split_whitespace() {
                        // later splits can expose a bare emoticon, e.g. ":)" in ":)12"
                        if emoticons && ASCII_EMOTICONS.contains(&tok) {
                            stats.rule_matches += 1;
                            tokens.push(self.config.rule(NoiseClass::Emoticon).placeholder.clone());
                        } else {
                            tokens.push(tok.to_string());
                        }
                    }
                }
            }
        }
        (TokenSequence { tokens }, stats)
    }

    fn find_spans(&self, class: NoiseClass, text: &str) -> Vec<(usize, usize)> {
        let p = patterns();
        let regex_spans = |re: &Regex| re.find_iter(text).map(|m| (m.start(), m.end())).collect();
        match class {
            NoiseClass::Tag => regex_spans(&p.tag),
            NoiseClass::Url => regex_spans(&p.url),
            NoiseClass::Number => regex_spans(&p.number),
            NoiseClass::Puncts => regex_spans(&p.puncts),
            NoiseClass::Phonetic => regex_spans(&p.phonetic),
            NoiseClass::Path => chunks(text)
                .filter(|&(s, e)| is_path(&text[s..e]))
                .collect(),
            NoiseClass::Alnum => chunks(text)
                .filter(|&(s, e)| is_alnum(&text[s..e]))
                .collect(),
            NoiseClass::Emoticon => {
                let mut spans: Vec<(usize, usize)> = chunks(text)
                    .filter(|&(s, e)| ASCII_EMOTICONS.contains(&&text[s..e]))
                    .collect();
                spans.extend(p.emoji.find_iter(text).map(|m| (m.start(), m.end())));
                spans.sort_unstable();
                spans
            }
            NoiseClass::NonFrench => self.non_french_runs(text),
        }
    }

    fn is_allowed(&self, c: char) -> bool {
        (c.is_ascii() && !c.is_ascii_control())
            || self.french.binary_search(&c).is_ok()
            || FRENCH_PUNCTUATION.contains(&c)
    }

    fn non_french_runs(&self, text: &str) -> Vec<(usize, usize)> {
        let mut spans = Vec::new();
        let mut start: Option<usize> = None;
        for (i, c) in text.char_indices() {
            let bad = !c.is_whitespace() && !self.is_allowed(c);
            match (bad, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    spans.push((s, i));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            spans.push((s, text.len()));
        }
        spans
    }
}

/// One-shot convenience wrapper; prefer a reused [`Normalizer`] in loops.
pub fn normalize(text: &str, config: &NormalizerConfig) -> Result<TokenSequence> {
    Ok(Normalizer::new(config.clone())?.normalize(text))
}

fn split_segments<F>(segments: Vec<Segment>, stats: &mut NormalizeStats, find: F) -> Vec<Segment>
where
    F: Fn(&str) -> Vec<(usize, usize, NoiseClass)>,
{
    let mut out = Vec::with_capacity(segments.len());
    for seg in segments {
        let text = match seg {
            Segment::Text(t) => t,
            mark => {
                out.push(mark);
                continue;
            }
        };
        let spans = find(&text);
        if spans.is_empty() {
            out.push(Segment::Text(text));
            continue;
        }
        let mut last = 0;
        for (s, e, class) in spans {
            // overlapping spans (only possible for emoticons) keep the first
            if s < last || s == e {
                continue;
            }
            if s > last {
                out.push(Segment::Text(text[last..s].to_string()));
            }
            out.push(Segment::Mark(class));
            stats.rule_matches += 1;
            last = e;
        }
        if last < text.len() {
            out.push(Segment::Text(text[last..].to_string()));
        }
    }
    out
}

/// Byte ranges of maximal non-whitespace runs.
fn chunks(text: &str) -> impl Iterator<Item = (usize, usize)> + '_ {
    let mut iter = text.char_indices().peekable();
    std::iter::from_fn(move || {
        while let Some(&(_, c)) = iter.peek() {
            if !c.is_whitespace() {
                break;
            }
            iter.next();
        }
        let (start, _) = *iter.peek()?;
        let mut end = start;
        while let Some(&(i, c)) = iter.peek() {
            if c.is_whitespace() {
                break;
            }
            end = i + c.len_utf8();
            iter.next();
        }
        Some((start, end))
    })
}

fn is_path(chunk: &str) -> bool {
    let separators = chunk.chars().filter(|&c| c == '/' || c == '\\').count();
    separators >= 2 && chunk.split(['/', '\\']).filter(|s| !s.is_empty()).count() >= 2
}

fn is_alnum(chunk: &str) -> bool {
    let letters = chunk.chars().filter(|c| c.is_alphabetic()).count();
    let digits = chunk.chars().filter(|c| c.is_ascii_digit()).count();
    letters >= 2 && digits >= 2
}
