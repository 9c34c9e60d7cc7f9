use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::dictionary::{Dictionary, DictionarySource};
use super::paratext::{strip_paratext_with, ParatextRules};
use super::RawDocument;
use crate::text;
use crate::{Error, Result};

/// Thresholds for the document filters. A document is accepted when
/// `word_count > min_words` and every ratio is below its limit (the token
/// dominance limit is inclusive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleaningConfig {
    pub min_words: usize,
    pub max_numeric_ratio: f64,
    pub max_misspell_ratio: f64,
    pub max_token_type_ratio: f64,
    pub max_symbol_ratio: f64,
    pub dictionary: DictionarySource,
    pub paratext: ParatextRules,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        CleaningConfig {
            min_words: 500,
            max_numeric_ratio: 0.10,
            max_misspell_ratio: 0.05,
            max_token_type_ratio: 0.10,
            max_symbol_ratio: 0.05,
            dictionary: DictionarySource::Bundled,
            paratext: ParatextRules::default(),
        }
    }
}

impl CleaningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_words < 1 {
            return Err(Error::InvalidConfig("min_words must be at least 1".into()));
        }
        for (name, v) in [
            ("max_numeric_ratio", self.max_numeric_ratio),
            ("max_misspell_ratio", self.max_misspell_ratio),
            ("max_token_type_ratio", self.max_token_type_ratio),
            ("max_symbol_ratio", self.max_symbol_ratio),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    TooShort,
    TooNumeric,
    TooMisspelled,
    TokenDominance,
    TooSymbolic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleaningReport {
    pub doc_id: String,
    pub word_count: usize,
    pub numeric_char_ratio: f64,
    pub misspell_ratio: f64,
    pub max_token_type_ratio: f64,
    pub symbol_ratio: f64,
    pub paratext_lines_removed: usize,
    pub accepted: bool,
    pub reject_reasons: Vec<RejectReason>,
}

/// A cleaning report together with the paratext-stripped text it describes.
#[derive(Debug, Clone)]
pub struct CleanedDocument {
    pub report: CleaningReport,
    pub text: String,
}

/// Applies [`CleaningConfig`] with its word list loaded once.
#[derive(Debug, Clone)]
pub struct Cleaner {
    config: CleaningConfig,
    dictionary: Option<Dictionary>,
}

impl Cleaner {
    pub fn new(config: CleaningConfig) -> Result<Self> {
        config.validate()?;
        let dictionary = Dictionary::load(&config.dictionary)?;
        Ok(Cleaner { config, dictionary })
    }

    pub fn with_dictionary(config: CleaningConfig, dictionary: Option<Dictionary>) -> Result<Self> {
        config.validate()?;
        Ok(Cleaner { config, dictionary })
    }

    pub fn config(&self) -> &CleaningConfig {
        &self.config
    }

    pub fn clean(&self, doc: &RawDocument) -> Result<CleanedDocument> {
        if doc.text.trim().is_empty() {
            return Err(Error::EmptyDocument(doc.id.clone()));
        }
        let cfg = &self.config;
        let (text, paratext_lines_removed) = strip_paratext_with(&doc.text, &cfg.paratext);

        let mut total_chars = 0usize;
        let mut digits = 0usize;
        let mut symbols = 0usize;
        for c in text.chars() {
            total_chars += 1;
            if c.is_numeric() {
                digits += 1;
            } else if !(c.is_alphabetic() || c.is_whitespace() || is_allowed_punctuation(c)) {
                symbols += 1;
            }
        }
        let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };

        let word_count = text::word_count(&text);

        let mut type_counts: HashMap<String, usize> = HashMap::new();
        let mut checked = 0usize;
        let mut misspelled = 0usize;
        for token in text::normalized_tokens(&text) {
            if let Some(dict) = &self.dictionary {
                if !token.chars().any(|c| c.is_numeric()) {
                    checked += 1;
                    if !dict.knows(&token) {
                        misspelled += 1;
                    }
                }
            }
            *type_counts.entry(token).or_default() += 1;
        }
        let token_total: usize = type_counts.values().sum();
        let max_type = type_counts.values().copied().max().unwrap_or(0);

        let report = CleaningReport {
            doc_id: doc.id.clone(),
            word_count,
            numeric_char_ratio: ratio(digits, total_chars),
            misspell_ratio: ratio(misspelled, checked),
            max_token_type_ratio: ratio(max_type, token_total),
            symbol_ratio: ratio(symbols, total_chars),
            paratext_lines_removed,
            accepted: false,
            reject_reasons: Vec::new(),
        };
        let report = cfg.judge(report);
        Ok(CleanedDocument { report, text })
    }
}

impl CleaningConfig {
    fn judge(&self, mut report: CleaningReport) -> CleaningReport {
        let mut reasons = Vec::new();
        if report.word_count <= self.min_words {
            reasons.push(RejectReason::TooShort);
        }
        if report.numeric_char_ratio >= self.max_numeric_ratio {
            reasons.push(RejectReason::TooNumeric);
        }
        if report.misspell_ratio >= self.max_misspell_ratio {
            reasons.push(RejectReason::TooMisspelled);
        }
        if report.max_token_type_ratio > self.max_token_type_ratio {
            reasons.push(RejectReason::TokenDominance);
        }
        if report.symbol_ratio >= self.max_symbol_ratio {
            reasons.push(RejectReason::TooSymbolic);
        }
        report.accepted = reasons.is_empty();
        report.reject_reasons = reasons;
        report
    }
}

/// One-shot form of [`Cleaner::clean`].
pub fn clean_document(doc: &RawDocument, config: &CleaningConfig) -> Result<CleaningReport> {
    Ok(Cleaner::new(config.clone())?.clean(doc)?.report)
}

fn is_allowed_punctuation(c: char) -> bool {
    matches!(
        c,
        '.' | ',' | ';' | ':' | '\'' | '"' | '!' | '?' | '(' | ')' | '-' | '\u{2014}'
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dictionary_words() -> Vec<String> {
        (0..200).map(word).collect()
    }

    // Distinct alphabetic pseudo-words: w0 -> "aa", w1 -> "ab", ...
    fn word(i: usize) -> String {
        let a = (b'a' + (i / 26) as u8) as char;
        let b = (b'a' + (i % 26) as u8) as char;
        format!("{a}{b}")
    }

    fn essay(n: usize) -> String {
        (0..n).map(|i| word(i % 200)).collect::<Vec<_>>().join(" ")
    }

    fn cleaner() -> Cleaner {
        Cleaner::with_dictionary(
            CleaningConfig::default(),
            Some(Dictionary::from_words(dictionary_words())),
        )
        .unwrap()
    }

    #[test]
    fn short_essay_rejected_only_for_length() {
        let doc = RawDocument::new("d", essay(400));
        let r = cleaner().clean(&doc).unwrap().report;
        assert!(!r.accepted);
        assert_eq!(r.reject_reasons, vec![RejectReason::TooShort]);
        assert_eq!(r.word_count, 400);
    }

    #[test]
    fn long_clean_essay_accepted() {
        let r = cleaner().clean(&RawDocument::new("d", essay(600))).unwrap().report;
        assert!(r.accepted, "{r:?}");
        assert!(r.reject_reasons.is_empty());
        assert_eq!(r.max_token_type_ratio, 3.0 / 600.0);
    }

    #[test]
    fn numeric_document_rejected() {
        // 600 words; a fraction of them are replaced by 4-digit numbers so that
        // digits make up just over 12% of all characters.
        let mut words: Vec<String> = (0..600).map(|i| word(i % 200)).collect();
        for i in (0..600).step_by(4).take(58) {
            words[i] = "1234".into();
        }
        let text = words.join(" ");
        let digits = text.chars().filter(|c| c.is_ascii_digit()).count();
        let total = text.chars().count();
        let expected = digits as f64 / total as f64;
        assert!(expected > 0.12 && expected < 0.125, "{expected}");

        let r = cleaner().clean(&RawDocument::new("d", text)).unwrap().report;
        assert_eq!(r.numeric_char_ratio, expected);
        assert_eq!(r.reject_reasons, vec![RejectReason::TooNumeric]);
    }

    #[test]
    fn single_token_dominates() {
        let text = vec!["hello"; 600].join(" ");
        let c = Cleaner::with_dictionary(
            CleaningConfig::default(),
            Some(Dictionary::from_words(["hello"])),
        )
        .unwrap();
        let r = c.clean(&RawDocument::new("d", text)).unwrap().report;
        assert_eq!(r.max_token_type_ratio, 1.0);
        assert!(r.reject_reasons.contains(&RejectReason::TokenDominance));
    }

    #[test]
    fn misspellings_and_symbols() {
        let mut words: Vec<String> = (0..600).map(|i| word(i % 200)).collect();
        for i in 0..40 {
            words[i * 10] = "zzq".into();
        }
        let r = cleaner().clean(&RawDocument::new("d", words.join(" "))).unwrap().report;
        assert_eq!(r.misspell_ratio, 40.0 / 600.0);
        assert!(r.reject_reasons.contains(&RejectReason::TooMisspelled));

        let mut words: Vec<String> = (0..600).map(|i| word(i % 200)).collect();
        for w in words.iter_mut().take(200) {
            w.push('$');
        }
        let r = cleaner().clean(&RawDocument::new("d", words.join(" "))).unwrap().report;
        assert!(r.symbol_ratio > 0.05);
        assert_eq!(r.reject_reasons, vec![RejectReason::TooSymbolic]);
    }

    #[test]
    fn paratext_is_stripped_before_counting() {
        let text = format!("Page 1 of 2\n{}\nReferences\n[1] Smith 2020", essay(600));
        let out = cleaner().clean(&RawDocument::new("d", text)).unwrap();
        assert_eq!(out.report.paratext_lines_removed, 3);
        assert!(out.report.accepted);
        assert_eq!(out.text, essay(600));
    }

    #[test]
    fn invalid_config() {
        let cfg = CleaningConfig {
            max_symbol_ratio: 1.5,
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        let cfg = CleaningConfig {
            min_words: 0,
            ..Default::default()
        };
        assert!(matches!(clean_document(&RawDocument::new("d", "x"), &cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn empty_document() {
        assert!(matches!(
            cleaner().clean(&RawDocument::new("d", " ")),
            Err(Error::EmptyDocument(_))
        ));
    }

    #[test]
    fn disabled_dictionary_scores_zero() {
        let c = Cleaner::new(CleaningConfig {
            dictionary: DictionarySource::Disabled,
            ..Default::default()
        })
        .unwrap();
        let r = c.clean(&RawDocument::new("d", "qqq www eee")).unwrap().report;
        assert_eq!(r.misspell_ratio, 0.0);
    }

    fn ratio() -> impl Strategy<Value = f64> {
        (0u32..=100).prop_map(|x| x as f64 / 100.0)
    }

    proptest! {
        #[test]
        fn lowering_thresholds_never_accepts(
            text in "[a-z0-9$%. ]{1,400}",
            base in (ratio(), ratio(), ratio(), ratio()),
            cut in (ratio(), ratio(), ratio(), ratio()),
        ) {
            prop_assume!(!text.trim().is_empty());
            let dict = Some(Dictionary::from_words(["ab", "cd", "a"]));
            let hi = CleaningConfig {
                min_words: 5,
                max_numeric_ratio: base.0,
                max_misspell_ratio: base.1,
                max_token_type_ratio: base.2,
                max_symbol_ratio: base.3,
                ..Default::default()
            };
            let lo = CleaningConfig {
                max_numeric_ratio: base.0 * cut.0,
                max_misspell_ratio: base.1 * cut.1,
                max_token_type_ratio: base.2 * cut.2,
                max_symbol_ratio: base.3 * cut.3,
                ..hi.clone()
            };
            let doc = RawDocument::new("d", text);
            let r_hi = Cleaner::with_dictionary(hi, dict.clone()).unwrap().clean(&doc).unwrap().report;
            let r_lo = Cleaner::with_dictionary(lo, dict).unwrap().clean(&doc).unwrap().report;
            prop_assert!(!r_lo.accepted || r_hi.accepted);
            for reason in &r_hi.reject_reasons {
                prop_assert!(r_lo.reject_reasons.contains(reason));
            }
        }

        #[test]
        fn cleaning_is_deterministic(text in "\\PC{1,300}") {
            prop_assume!(!text.trim().is_empty());
            let doc = RawDocument::new("d", text);
            let a = cleaner().clean(&doc).unwrap();
            let b = cleaner().clean(&doc).unwrap();
            prop_assert_eq!(
                serde_json::to_string(&a.report).unwrap(),
                serde_json::to_string(&b.report).unwrap()
            );
            for r in [a.report.numeric_char_ratio, a.report.misspell_ratio, a.report.max_token_type_ratio, a.report.symbol_ratio] {
                prop_assert!((0.0..=1.0).contains(&r));
            }
        }
    }
}
