//! Word-level helpers shared by the cleaning, segmentation and prompt stages.

/// Byte spans of whitespace-delimited words.
pub fn word_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                spans.push((s, i));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Lowercased token with leading and trailing punctuation removed.
/// Returns `None` when nothing alphanumeric is left.
pub fn normalize_token(token: &str) -> Option<String> {
    let trimmed = token.trim_matches(|c: char| !c.is_alphanumeric());
    if trimmed.is_empty() {
        None
    } else {
        Some(trimmed.to_lowercase().replace('\u{2019}', "'"))
    }
}

pub fn normalized_tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace().filter_map(normalize_token)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans_cover_words() {
        let text = "  one two\n\tthree ";
        let spans = word_spans(text);
        let words: Vec<&str> = spans.iter().map(|&(s, e)| &text[s..e]).collect();
        assert_eq!(words, ["one", "two", "three"]);
    }

    #[test]
    fn normalize_strips_punctuation() {
        assert_eq!(normalize_token("\"Hello,").as_deref(), Some("hello"));
        assert_eq!(normalize_token("don\u{2019}t").as_deref(), Some("don't"));
        assert_eq!(normalize_token("--"), None);
    }
}
