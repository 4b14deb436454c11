//! Rebuilding words from per-note lyric events.
//!
//! Files mark word structure in two common ways: hyphens on word-internal
//! syllables (`"lis-" "ten"`), or whitespace at word boundaries
//! (`"Lis" "ten " "to"`). A syllable continues the previous word when the
//! previous event ends with `-` or the current one starts with `-`. Failing
//! that, files that use boundary whitespace anywhere are read in whitespace
//! mode (no boundary whitespace means the same word); otherwise every event
//! is its own word.

use crate::embedding::{normalize_fragment, SyllablePair};

fn is_boundary(c: char) -> bool {
    c.is_whitespace() || c == '/' || c == '\\'
}

/// One entry per lyric event; `None` for events that carry no English
/// syllable.
pub fn align_syllables<S: AsRef<str>>(texts: &[S]) -> Vec<Option<SyllablePair>> {
    let whitespace_mode = texts.iter().any(|t| {
        let t = t.as_ref();
        t.starts_with(is_boundary) || t.ends_with(is_boundary)
    });

    // Group indices into words.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut prev: Option<&str> = None;
    for (i, text) in texts.iter().enumerate() {
        let text = text.as_ref();
        let joins = match prev {
            None => false,
            Some(p) => {
                let p_trim = p.trim_end_matches(is_boundary);
                let p_ends_boundary = p.ends_with(is_boundary);
                let starts_boundary = text.starts_with(is_boundary);
                if starts_boundary || (p_ends_boundary && !p_trim.ends_with('-')) {
                    false
                } else if p_trim.ends_with('-') || text.starts_with('-') {
                    true
                } else {
                    whitespace_mode
                }
            }
        };
        if joins {
            groups.last_mut().expect("a previous group exists").push(i);
        } else {
            groups.push(vec![i]);
        }
        prev = Some(text);
    }

    let mut out = vec![None; texts.len()];
    for group in groups {
        let syllables: Vec<(usize, String)> = group
            .iter()
            .filter_map(|&i| normalize_fragment(texts[i].as_ref()).map(|s| (i, s)))
            .collect();
        let word: String = syllables.iter().map(|(_, s)| s.as_str()).collect();
        for (i, s) in syllables {
            out[i] = Some(SyllablePair::new(word.clone(), s));
        }
    }
    out
}

/// Lyric event texts for a syllable sequence: every syllable except the last
/// of its word gets a trailing `-`.
///
/// Consecutive pairs sharing a word belong to one occurrence of that word
/// until their syllables spell it out completely, so repeated words stay
/// separate.
pub fn lyric_event_texts(pairs: &[SyllablePair]) -> Vec<String> {
    let mut out = Vec::with_capacity(pairs.len());
    let mut spelled = 0usize;
    for (i, p) in pairs.iter().enumerate() {
        let same_occurrence = i > 0 && pairs[i - 1].word == p.word && spelled > 0;
        spelled = if same_occurrence { spelled + p.syllable.len() } else { p.syllable.len() };
        let continues = spelled < p.word.len() && pairs.get(i + 1).is_some_and(|next| next.word == p.word);
        if continues {
            out.push(format!("{}-", p.syllable));
        } else {
            out.push(p.syllable.clone());
            spelled = 0;
        }
    }
    out
}
