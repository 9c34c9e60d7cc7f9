//! Removal of headers, footers, page numbers and bibliographies.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// Line-based paratext rules, applied in field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParatextRules {
    /// Drop `Page N`, `Page N of M` and bare integers of at most four digits
    /// standing alone on a line.
    pub page_numbers: bool,
    /// A line equal (case-insensitively, ignoring a trailing colon) to one of
    /// these headings cuts the document from that line to the end.
    pub bibliography_headings: Vec<String>,
    /// Drop short lines repeated identically at least `running_line_repeats`
    /// times. Only applied when page-number lines were found, i.e. the text
    /// is a paginated document rather than a single page.
    pub running_lines: bool,
    pub running_line_repeats: usize,
    pub running_line_max_words: usize,
}

impl Default for ParatextRules {
    fn default() -> Self {
        ParatextRules {
            page_numbers: true,
            bibliography_headings: vec![
                "references".into(),
                "bibliography".into(),
                "works cited".into(),
            ],
            running_lines: true,
            running_line_repeats: 3,
            running_line_max_words: 12,
        }
    }
}

/// [`strip_paratext_with`] under the default rules.
pub fn strip_paratext(text: &str) -> (String, usize) {
    strip_paratext_with(text, &ParatextRules::default())
}

/// Returns the text without paratext lines and the number of lines removed.
/// Idempotent for any rule set.
pub fn strip_paratext_with(text: &str, rules: &ParatextRules) -> (String, usize) {
    let lines: Vec<&str> = text.split('\n').collect();
    let total = lines.len();

    let mut keep: Vec<&str> = Vec::with_capacity(total);
    let mut saw_page_number = false;
    for line in &lines {
        if rules.page_numbers && is_page_number(line) {
            saw_page_number = true;
            continue;
        }
        keep.push(line);
    }

    if let Some(cut) = keep
        .iter()
        .position(|line| is_bibliography_heading(line, &rules.bibliography_headings))
    {
        keep.truncate(cut);
    }

    if rules.running_lines && saw_page_number && rules.running_line_repeats > 1 {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for line in &keep {
            let t = line.trim();
            if !t.is_empty() && t.split_whitespace().count() <= rules.running_line_max_words {
                *counts.entry(t).or_default() += 1;
            }
        }
        keep.retain(|line| {
            counts
                .get(line.trim())
                .is_none_or(|&n| n < rules.running_line_repeats)
        });
    }

    let removed = total - keep.len();
    if removed == 0 {
        (text.to_string(), 0)
    } else {
        (keep.join("\n"), removed)
    }
}

fn is_page_number(line: &str) -> bool {
    let t = line.trim();
    if is_small_int(t) {
        return true;
    }
    let mut words = t.split_whitespace();
    match (words.next(), words.next(), words.next(), words.next(), words.next()) {
        (Some(p), Some(n), None, None, None) => p.eq_ignore_ascii_case("page") && is_int(n),
        (Some(p), Some(n), Some(of), Some(m), None) => {
            p.eq_ignore_ascii_case("page") && is_int(n) && of.eq_ignore_ascii_case("of") && is_int(m)
        }
        _ => false,
    }
}

fn is_int(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn is_small_int(s: &str) -> bool {
    is_int(s) && s.len() <= 4
}

fn is_bibliography_heading(line: &str, headings: &[String]) -> bool {
    let t = line.trim();
    let t = t.strip_suffix(':').unwrap_or(t).trim();
    headings.iter().any(|h| t.eq_ignore_ascii_case(h))
}
