//! Phrase rules that recover dependencies from free-text card descriptions.
//!
//! Matching is case-insensitive (ASCII) over normalized text; captured names
//! keep their original spelling. A name runs from the end of the trigger
//! phrase up to the next punctuation mark, sentence end, line break, or
//! connecting word ("on", "with", "using", ...). List rules ("merge of A and
//! B") split their capture on commas and "and".

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{EvidenceSource, Mention};
use crate::ids::EdgeKind;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TextRule {
    /// Lower-case trigger phrase.
    pub phrase: String,
    pub kind: EdgeKind,
    /// Whether the capture is a list of names.
    pub list: bool,
}

impl TextRule {
    pub fn new(phrase: &str, kind: EdgeKind, list: bool) -> Self {
        TextRule {
            phrase: phrase.to_ascii_lowercase(),
            kind,
            list,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TextRules {
    pub rules: Vec<TextRule>,
    /// Longest name kept, in whitespace-separated tokens.
    pub max_tokens: usize,
}

impl Default for TextRules {
    fn default() -> Self {
        use EdgeKind::*;
        TextRules {
            rules: alloc::vec![
                TextRule::new("fine-tuned from", FineTune, false),
                TextRule::new("finetuned from", FineTune, false),
                TextRule::new("trained on", TrainedOn, false),
                TextRule::new("adapted from", Adapter, false),
                TextRule::new("adapter for", Adapter, false),
                TextRule::new("quantized version of", Quantization, false),
                TextRule::new("quantization of", Quantization, false),
                TextRule::new("merge of", Merge, true),
                TextRule::new("merged from", Merge, true),
                TextRule::new("subset of", Subset, false),
            ],
            max_tokens: 4,
        }
    }
}

impl TextRules {
    pub fn with_rule(mut self, rule: TextRule) -> Self {
        self.rules.push(rule);
        self
    }
}

const STOP_WORDS: &[&str] = &[
    "and", "on", "with", "using", "via", "by", "for", "in", "into", "to", "from", "which", "that", "as", "at", "is",
    "was", "were", "are", "or", "but", "then", "while", "after",
];
const TRAILING_NOUNS: &[&str] = &["dataset", "datasets", "model", "models", "corpus", "checkpoint"];
const HARD_STOPS: &[char] = &[',', ';', ':', '!', '?', '(', ')', '[', ']', '{', '}', '<', '>', '|'];
const QUOTES: &[char] = &['"', '\'', '`', '*', '_'];

/// Canonical form the extractor works on: typographic dashes and quotes
/// mapped to ASCII, CRLF folded to LF, runs of blanks collapsed to one space.
pub fn normalize_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        let c = match c {
            '\u{2010}' | '\u{2011}' | '\u{2012}' | '\u{2013}' | '\u{2014}' | '\u{2212}' => '-',
            '\u{2018}' | '\u{2019}' => '\'',
            '\u{201C}' | '\u{201D}' => '"',
            '\r' => continue,
            c => c,
        };
        if c == '\n' {
            pending_space = false;
            while out.ends_with(' ') {
                out.pop();
            }
            out.push('\n');
        } else if c.is_whitespace() {
            pending_space = true;
        } else {
            if pending_space && !out.is_empty() && !out.ends_with('\n') {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        }
    }
    out
}

/// Extracts dependencies with the default rule set.
pub fn extract_textual_dependencies(text: &str) -> Vec<Mention> {
    extract_with_rules(&TextRules::default(), text)
}

pub fn extract_with_rules(rules: &TextRules, text: &str) -> Vec<Mention> {
    let text = normalize_text(text);
    let lower = text.to_ascii_lowercase();
    let mut hits: Vec<(usize, &TextRule)> = Vec::new();
    for rule in &rules.rules {
        if rule.phrase.is_empty() {
            continue;
        }
        let mut from = 0;
        while let Some(off) = lower[from..].find(rule.phrase.as_str()) {
            let at = from + off;
            from = at + rule.phrase.len();
            let before_ok = lower[..at].chars().next_back().is_none_or(|c| !c.is_alphanumeric());
            let after_ok = lower[from..].chars().next().is_none_or(|c| c == ' ');
            if before_ok && after_ok {
                hits.push((at, rule));
            }
        }
    }
    hits.sort_by_key(|(at, _)| *at);
    let starts: Vec<usize> = hits.iter().map(|(at, _)| *at).collect();

    let mut out: Vec<Mention> = Vec::new();
    for (at, rule) in &hits {
        let start = at + rule.phrase.len();
        for name in capture(&text, start, rule.list, rules.max_tokens, &starts) {
            let m = Mention {
                name,
                kind: rule.kind,
                source: EvidenceSource::TextPattern,
            };
            if !out.contains(&m) {
                out.push(m);
            }
        }
    }
    out
}

/// Reads names starting at byte `start`.
fn capture(text: &str, start: usize, list: bool, max_tokens: usize, trigger_starts: &[usize]) -> Vec<String> {
    let line_end = text[start..].find('\n').map_or(text.len(), |i| start + i);
    let segment = &text[start..line_end];
    let mut names = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut overflow = false;

    let flush = |current: &mut Vec<&str>, overflow: &mut bool, names: &mut Vec<String>| {
        while current
            .last()
            .is_some_and(|t| current.len() > 1 && TRAILING_NOUNS.contains(&t.to_ascii_lowercase().as_str()))
        {
            current.pop();
        }
        if !*overflow && !current.is_empty() {
            names.push(current.join(" "));
        }
        current.clear();
        *overflow = false;
    };

    let mut offset = 0;
    for raw in segment.split(' ') {
        let token_start = start + offset;
        offset += raw.len() + 1;
        if raw.is_empty() {
            continue;
        }
        if trigger_starts.contains(&token_start) {
            break;
        }
        let lowered = raw.to_ascii_lowercase();
        let word = lowered.trim_matches(QUOTES);
        if STOP_WORDS.contains(&word) {
            if list && word == "and" {
                flush(&mut current, &mut overflow, &mut names);
                continue;
            }
            break;
        }
        // Cut at the first hard stop; a trailing period ends the sentence.
        let (mut token, mut stop, mut separator) = (raw, false, false);
        if let Some(pos) = token.find(HARD_STOPS) {
            separator = list && token[pos..].starts_with(',');
            stop = !separator;
            token = &token[..pos];
        }
        if let Some(stripped) = token.strip_suffix('.') {
            token = stripped;
            stop = true;
            separator = false;
        }
        let token = token.trim_matches(QUOTES);
        if !token.is_empty() {
            if current.len() == max_tokens {
                overflow = true;
            } else {
                current.push(token);
            }
        }
        if separator {
            flush(&mut current, &mut overflow, &mut names);
        }
        if stop {
            break;
        }
    }
    flush(&mut current, &mut overflow, &mut names);
    if !list {
        names.truncate(1);
    }
    names
        .into_iter()
        .map(|n| n.trim().to_string())
        .filter(|n| !n.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(text: &str) -> Vec<(String, EdgeKind)> {
        extract_textual_dependencies(text)
            .into_iter()
            .map(|m| (m.name, m.kind))
            .collect()
    }

    #[test]
    fn fine_tuned_from() {
        assert_eq!(
            names("fine-tuned from Llama-2"),
            alloc::vec![("Llama-2".into(), EdgeKind::FineTune)]
        );
    }

    #[test]
    fn empty_text() {
        assert!(names("").is_empty());
    }

    #[test]
    fn merge_list() {
        assert_eq!(
            names("merge of org/a and org/b"),
            alloc::vec![("org/a".into(), EdgeKind::Merge), ("org/b".into(), EdgeKind::Merge)]
        );
    }

    #[test]
    fn stops_at_connecting_words_and_periods() {
        assert_eq!(
            names(
                "This model is fine-tuned from meta-llama/Llama-2-7b on Alpaca. It was trained on The Pile, a corpus."
            ),
            alloc::vec![
                ("meta-llama/Llama-2-7b".into(), EdgeKind::FineTune),
                ("The Pile".into(), EdgeKind::TrainedOn)
            ]
        );
    }

    #[test]
    fn word_boundary_required() {
        assert!(names("we retrained on x").is_empty());
    }

    #[test]
    fn dots_inside_names_survive() {
        assert_eq!(
            names("A quantized version of mistralai/Mistral-7B-v0.1."),
            alloc::vec![("mistralai/Mistral-7B-v0.1".into(), EdgeKind::Quantization)]
        );
    }

    #[test]
    fn duplicates_collapse() {
        assert_eq!(names("fine-tuned from X. Also fine-tuned from X.").len(), 1);
    }

    #[test]
    fn normalization_is_idempotent() {
        let t = "a \u{2014}  b\r\n  c\t\td ";
        let n = normalize_text(t);
        assert_eq!(normalize_text(&n), n);
    }
}
