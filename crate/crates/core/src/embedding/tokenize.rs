use super::syllabify::Syllabifier;
use super::token::{normalize_fragment, SyllablePair};

/// A syllable with its parent word and the sentence it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenPair {
    pub sentence: usize,
    pub pair: SyllablePair,
}

fn is_sentence_break(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | ';' | '\n' | '\r')
}

/// Splits lyrics into sentences, words and syllables, in reading order.
///
/// Text is lowercased and stripped of punctuation; apostrophes join their word
/// (`don't` → `dont`), any other non-alphanumeric character separates words.
pub fn tokenize(text: &str, syllabifier: &Syllabifier) -> Vec<TokenPair> {
    let mut out = Vec::new();
    let mut sentence = 0;
    for chunk in text.split(is_sentence_break) {
        let mut any = false;
        for raw in chunk.split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '’')) {
            let Some(word) = normalize_fragment(raw) else { continue };
            for syllable in syllabifier.syllabify(&word) {
                out.push(TokenPair {
                    sentence,
                    pair: SyllablePair::new(word.clone(), syllable),
                });
            }
            any = true;
        }
        if any {
            sentence += 1;
        }
    }
    out
}

/// Word-level and syllable-level token streams, one inner list per sentence,
/// as fed to the two skip-gram models.
pub fn corpus_streams(pairs: &[TokenPair]) -> (Vec<Vec<String>>, Vec<Vec<String>>) {
    let mut words: Vec<Vec<String>> = Vec::new();
    let mut syllables: Vec<Vec<String>> = Vec::new();
    let mut current = usize::MAX;
    let mut last_word: Option<(usize, &str)> = None;
    for (i, tp) in pairs.iter().enumerate() {
        if tp.sentence != current {
            current = tp.sentence;
            words.push(Vec::new());
            syllables.push(Vec::new());
            last_word = None;
        }
        syllables.last_mut().unwrap().push(tp.pair.syllable.clone());
        // A new word starts when the word text changes or the previous
        // occurrence is already fully spelled.
        let starts_word = match last_word {
            None => true,
            Some((start, w)) => {
                w != tp.pair.word
                    || pairs[start..i].iter().map(|p| p.pair.syllable.len()).sum::<usize>() >= w.len()
            }
        };
        if starts_word {
            words.last_mut().unwrap().push(tp.pair.word.clone());
            last_word = Some((i, tp.pair.word.as_str()));
        }
    }
    (words, syllables)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(text: &str) -> Vec<(String, String)> {
        tokenize(text, &Syllabifier::new())
            .into_iter()
            .map(|t| (t.pair.word, t.pair.syllable))
            .collect()
    }

    #[test]
    fn listen() {
        assert_eq!(
            pairs("listen"),
            vec![("listen".into(), "lis".into()), ("listen".into(), "ten".into())]
        );
    }

    #[test]
    fn monosyllable() {
        assert_eq!(pairs("a"), vec![("a".into(), "a".into())]);
    }

    #[test]
    fn empty_text() {
        assert!(pairs("").is_empty());
        assert!(pairs("  ...  ").is_empty());
    }

    #[test]
    fn case_and_punctuation() {
        assert_eq!(
            pairs("Don't, STOP!"),
            vec![("dont".into(), "dont".into()), ("stop".into(), "stop".into())]
        );
    }

    #[test]
    fn sentences_are_numbered() {
        let t = tokenize("I sing. You listen!\nLa la", &Syllabifier::new());
        let sentences: Vec<usize> = t.iter().map(|p| p.sentence).collect();
        assert_eq!(sentences, vec![0, 0, 1, 1, 1, 2, 2]);
    }

    #[test]
    fn streams_split_words_and_syllables() {
        let t = tokenize("listen listen to me. la la", &Syllabifier::new());
        let (words, syllables) = corpus_streams(&t);
        assert_eq!(words, vec![vec!["listen", "listen", "to", "me"], vec!["la", "la"]]);
        assert_eq!(
            syllables,
            vec![vec!["lis", "ten", "lis", "ten", "to", "me"], vec!["la", "la"]]
        );
    }
}
