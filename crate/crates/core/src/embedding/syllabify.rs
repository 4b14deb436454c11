//! Splitting English words into syllables.
//!
//! Known words come from a dictionary (seeded with a handful of irregular
//! words and extended from syllable-aligned lyrics). Everything else goes
//! through consonant-cluster rules: vowel groups form syllable nuclei, single
//! consonants start the next syllable, clusters split after their first
//! consonant unless the tail is a common onset (`st`, `tr`, `bl`, ...).
//! Splits never add or drop letters, so the syllables always spell the word.

use std::collections::HashMap;

use super::token::SyllablePair;

const IRREGULAR: &[(&str, &[&str])] = &[
    ("every", &["ev", "ery"]),
    ("everything", &["ev", "ery", "thing"]),
    ("fire", &["fire"]),
    ("hour", &["hour"]),
    ("people", &["peo", "ple"]),
    ("heaven", &["hea", "ven"]),
    ("little", &["lit", "tle"]),
    ("maybe", &["may", "be"]),
    ("someone", &["some", "one"]),
    ("something", &["some", "thing"]),
    ("forever", &["for", "ev", "er"]),
    ("into", &["in", "to"]),
    ("yeah", &["yeah"]),
];

/// Two-letter clusters that begin English syllables.
const ONSETS: &[&str] = &[
    "bl", "br", "ch", "cl", "cr", "dr", "fl", "fr", "gl", "gr", "ph", "pl", "pr", "sc", "sh", "sk", "sl", "sm",
    "sn", "sp", "st", "sw", "th", "tr", "tw", "wh", "wr",
];

/// Letter pairs that spell a single consonant sound and are never split.
const DIGRAPHS: &[&str] = &["ch", "sh", "th", "ph", "wh", "ck", "gh"];

#[derive(Debug, Clone)]
pub struct Syllabifier {
    dictionary: HashMap<String, Vec<String>>,
}

impl Default for Syllabifier {
    fn default() -> Self {
        Self::new()
    }
}

impl Syllabifier {
    pub fn new() -> Self {
        let dictionary = IRREGULAR
            .iter()
            .map(|(w, s)| ((*w).to_owned(), s.iter().map(|x| (*x).to_owned()).collect()))
            .collect();
        Self { dictionary }
    }

    pub fn insert(&mut self, word: &str, syllables: Vec<String>) {
        if !syllables.is_empty() && syllables.concat() == word {
            self.dictionary.insert(word.to_owned(), syllables);
        }
    }

    /// Records the splits observed in aligned lyrics. A word occurrence ends
    /// once its syllables spell the word.
    pub fn learn_from(&mut self, pairs: &[SyllablePair]) {
        let mut current: Vec<String> = Vec::new();
        for (i, p) in pairs.iter().enumerate() {
            if i > 0 && pairs[i - 1].word != p.word {
                current.clear();
            }
            current.push(p.syllable.clone());
            let spelled: String = current.concat();
            if spelled == p.word {
                if !self.dictionary.contains_key(&p.word) {
                    self.dictionary.insert(p.word.clone(), std::mem::take(&mut current));
                }
                current.clear();
            } else if !p.word.starts_with(&spelled) {
                current.clear();
            }
        }
    }

    pub fn len(&self) -> usize {
        self.dictionary.len()
    }

    /// Dictionary as text: one word per line followed by its syllables,
    /// sorted by word.
    pub fn to_text(&self) -> String {
        let mut words: Vec<&String> = self.dictionary.keys().collect();
        words.sort();
        let mut out = String::new();
        for w in words {
            out.push_str(w);
            for s in &self.dictionary[w] {
                out.push(' ');
                out.push_str(s);
            }
            out.push('\n');
        }
        out
    }

    /// Extends the built-in dictionary with [`Syllabifier::to_text`] entries.
    /// Lines whose syllables do not spell their word are skipped.
    pub fn from_text(text: &str) -> Self {
        let mut out = Self::new();
        for line in text.lines() {
            let mut fields = line.split_whitespace();
            if let Some(word) = fields.next() {
                out.insert(word, fields.map(str::to_owned).collect());
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.dictionary.is_empty()
    }

    /// Syllables of a normalised (lowercase ASCII) word.
    pub fn syllabify(&self, word: &str) -> Vec<String> {
        if let Some(s) = self.dictionary.get(word) {
            return s.clone();
        }
        rule_based(word)
    }
}

fn is_vowel(chars: &[u8], i: usize) -> bool {
    match chars[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => true,
        // `y` is a vowel except at the start of a word or after a vowel.
        b'y' => i > 0 && !matches!(chars[i - 1], b'a' | b'e' | b'i' | b'o' | b'u'),
        _ => false,
    }
}

fn rule_based(word: &str) -> Vec<String> {
    let b = word.as_bytes();
    let n = b.len();
    if n <= 3 || !word.is_ascii() {
        return vec![word.to_owned()];
    }
    let mut vowel: Vec<bool> = (0..n).map(|i| is_vowel(b, i)).collect();

    let consonant = |i: usize, v: &[bool]| !v[i];
    // Silent endings: final e (but not consonant + "le"), "es" and "ed" after
    // letters that do not voice them.
    if b[n - 1] == b'e' && n >= 2 && consonant(n - 2, &vowel) {
        let consonant_le = b[n - 2] == b'l' && n >= 3 && consonant(n - 3, &vowel);
        if !consonant_le {
            vowel[n - 1] = false;
        }
    }
    if n >= 4 && b[n - 2] == b'e' && consonant(n - 3, &vowel) {
        let silent = match b[n - 1] {
            b'd' => !matches!(b[n - 3], b't' | b'd'),
            b's' => !matches!(b[n - 3], b's' | b'x' | b'z' | b'c' | b'g' | b'h'),
            _ => false,
        };
        if silent {
            vowel[n - 2] = false;
        }
    }

    // Vowel groups as (start, end) half-open ranges.
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        if vowel[i] {
            let start = i;
            while i < n && vowel[i] {
                i += 1;
            }
            groups.push((start, i));
        } else {
            i += 1;
        }
    }
    if groups.len() <= 1 {
        return vec![word.to_owned()];
    }

    let mut cuts = Vec::new();
    for pair in groups.windows(2) {
        let (lo, hi) = (pair[0].1, pair[1].0);
        let cluster = &word[lo..hi];
        let cut = match cluster.len() {
            0 => lo,
            1 => {
                if cluster == "x" {
                    hi
                } else {
                    lo
                }
            }
            2 if cluster == "ck" => hi,
            2 if DIGRAPHS.contains(&cluster) => lo,
            2 => lo + 1,
            len => {
                let tail = &cluster[len - 2..];
                if ONSETS.contains(&tail) {
                    hi - 2
                } else {
                    hi - 1
                }
            }
        };
        cuts.push(cut);
    }
    // Consonant + "le" closes the word as one syllable: ta-ble, lit-tle.
    if word.ends_with("le") && n >= 4 && !vowel[n - 3] && vowel[n - 1] {
        if let Some(last) = cuts.last_mut() {
            *last = n - 3;
        }
    }
    // Suffixes stay whole after a consonant: sing-ing, want-ed.
    let suffix = if word.ends_with("ing") && n >= 5 && !vowel[n - 4] {
        Some(3)
    } else if word.ends_with("ed") && vowel[n - 2] && matches!(b[n - 3], b't' | b'd') && !vowel[n - 4] {
        Some(2)
    } else {
        None
    };
    if let Some(len) = suffix {
        if let Some(last) = cuts.last_mut() {
            *last = n - len;
        }
    }

    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut start = 0;
    for cut in cuts {
        if cut > start && cut < n {
            out.push(word[start..cut].to_owned());
            start = cut;
        }
    }
    out.push(word[start..].to_owned());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut s = Syllabifier::new();
        s.insert("melody", vec!["mel".into(), "o".into(), "dy".into()]);
        let back = Syllabifier::from_text(&s.to_text());
        assert_eq!(back.to_text(), s.to_text());
        assert_eq!(back.syllabify("melody"), vec!["mel", "o", "dy"]);
        assert_eq!(Syllabifier::from_text("bad ba x\n").len(), Syllabifier::new().len());
    }

    fn split(w: &str) -> Vec<String> {
        Syllabifier::new().syllabify(w)
    }

    #[test]
    fn common_words() {
        assert_eq!(split("listen"), vec!["lis", "ten"]);
        assert_eq!(split("a"), vec!["a"]);
        assert_eq!(split("happy"), vec!["hap", "py"]);
        assert_eq!(split("beautiful"), vec!["beau", "ti", "ful"]);
        assert_eq!(split("singing"), vec!["sing", "ing"]);
        assert_eq!(split("table"), vec!["ta", "ble"]);
        assert_eq!(split("love"), vec!["love"]);
        assert_eq!(split("loved"), vec!["loved"]);
        assert_eq!(split("wanted"), vec!["want", "ed"]);
        assert_eq!(split("morning"), vec!["morn", "ing"]);
        assert_eq!(split("together"), vec!["to", "ge", "ther"]);
        assert_eq!(split("people"), vec!["peo", "ple"]);
    }

    #[test]
    fn syllables_always_spell_the_word() {
        for w in [
            "strengths", "rhythm", "queue", "extraordinary", "yesterday", "christmas", "broken", "hearted",
            "divine", "remember", "everybody", "aaaa", "xyz", "crying",
        ] {
            assert_eq!(split(w).concat(), w, "{w}");
        }
    }

    #[test]
    fn learned_splits_override_rules() {
        let mut s = Syllabifier::new();
        s.learn_from(&[
            SyllablePair::new("singing", "sin"),
            SyllablePair::new("singing", "ging"),
            SyllablePair::new("to", "to"),
        ]);
        assert_eq!(s.syllabify("singing"), vec!["sin", "ging"]);
        assert_eq!(s.syllabify("to"), vec!["to"]);
    }
}
