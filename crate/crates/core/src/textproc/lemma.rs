use std::collections::HashMap;
use std::path::Path;

const EXCEPTIONS: &str = include_str!("../../resources/lemma_exceptions.tsv");

/// Lowercasing lemmatizer: exception table first, then ordered English suffix
/// rules, repeated until nothing fires. Because the result is a fixpoint,
/// lemmatizing a lemma returns it unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemmatizer {
    exceptions: HashMap<String, String>,
}

impl Default for Lemmatizer {
    fn default() -> Self {
        Self::from_tsv(EXCEPTIONS).expect("bundled exception table is well-formed")
    }
}

enum Step {
    Rewrite(String),
    Stop,
}

fn has_vowel(s: &str) -> bool {
    s.chars().any(|c| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y'))
}

fn undouble(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 3 && b[n - 1] == b[n - 2] && !b"aeiouylsz".contains(&b[n - 1]) {
        stem[..n - 1].to_string()
    } else {
        stem.to_string()
    }
}

fn suffix_rule(w: &str) -> Step {
    // byte lengths are character lengths: rules only fire on ASCII letters
    let n = w.len();
    let stem = |k: usize| &w[..n - k];
    if w.ends_with("ies") && n - 3 >= 2 {
        return Step::Rewrite(format!("{}y", stem(3)));
    }
    if w.ends_with("sses") {
        return Step::Rewrite(stem(2).to_string());
    }
    if (w.ends_with("ches") || w.ends_with("shes") || w.ends_with("xes") || w.ends_with("zzes"))
        && n - 2 >= 3
    {
        return Step::Rewrite(stem(2).to_string());
    }
    if w.ends_with("ss") || w.ends_with("us") || w.ends_with("is") {
        return Step::Stop;
    }
    if w.ends_with('s') && n - 1 >= 3 {
        return Step::Rewrite(stem(1).to_string());
    }
    if w.ends_with("ied") && n - 3 >= 2 {
        return Step::Rewrite(format!("{}y", stem(3)));
    }
    if w.ends_with("eed") {
        return Step::Stop;
    }
    if w.ends_with("ed") && n - 2 >= 3 && has_vowel(stem(2)) {
        return Step::Rewrite(undouble(stem(2)));
    }
    if w.ends_with("ing") && n - 3 >= 3 && has_vowel(stem(3)) {
        return Step::Rewrite(undouble(stem(3)));
    }
    if w.ends_with("iest") && n - 4 >= 2 {
        return Step::Rewrite(format!("{}y", stem(4)));
    }
    if w.ends_with("ier") && n - 3 >= 3 {
        return Step::Rewrite(format!("{}y", stem(3)));
    }
    if w.ends_with("est") && n - 3 >= 4 && has_vowel(stem(3)) {
        return Step::Rewrite(undouble(stem(3)));
    }
    if w.ends_with("er") && n - 2 >= 4 {
        let s = stem(2);
        let u = undouble(s);
        if u.len() < s.len() {
            return Step::Rewrite(u);
        }
    }
    Step::Stop
}

impl Lemmatizer {
    /// Parses `surface\tlemma` lines. Blank lines and `#` comments are skipped.
    pub fn from_tsv(tsv: &str) -> Result<Self, String> {
        let mut exceptions = HashMap::new();
        for (i, line) in tsv.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('\t')
                .ok_or_else(|| format!("line {}: expected `surface\\tlemma`", i + 1))?;
            if k.is_empty() || v.is_empty() {
                return Err(format!("line {}: empty field", i + 1));
            }
            exceptions.insert(k.to_lowercase(), v.to_lowercase());
        }
        Ok(Lemmatizer { exceptions })
    }

    pub fn from_path(path: &Path) -> Result<Self, String> {
        let raw = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_tsv(&raw).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn lemmatize(&self, surface: &str) -> String {
        let mut w = surface.to_lowercase();
        loop {
            if let Some(l) = self.exceptions.get(&w) {
                return l.clone();
            }
            if !w.chars().all(|c| c.is_ascii_lowercase() || c == '-') || !w.ends_with(|c: char| c.is_ascii_lowercase()) {
                return w;
            }
            match suffix_rule(&w) {
                Step::Rewrite(next) => w = next,
                Step::Stop => return w,
            }
        }
    }

    pub fn exception_targets(&self) -> impl Iterator<Item = &str> {
        self.exceptions.values().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn suffix_rule_fixture() {
        let l = Lemmatizer::default();
        let cases = [
            ("tablets", "tablet"),
            ("remains", "remain"),
            ("Arimidex", "arimidex"),
            ("therapies", "therapy"),
            ("masses", "mass"),
            ("biopsies", "biopsy"),
            ("boxes", "box"),
            ("metastasis", "metastasis"),
            ("started", "start"),
            ("stopped", "stop"),
            ("stopping", "stop"),
            ("studied", "study"),
            ("earlier", "early"),
            ("bigger", "big"),
            ("biggest", "big"),
            ("highest", "high"),
            ("cancer", "cancer"),
            ("was", "be"),
            ("letters", "letter"),
            ("x-rays", "x-ray"),
            ("2011", "2011"),
            ("follow-up", "follow-up"),
            ("as", "as"),
            ("red", "red"),
        ];
        for (w, want) in cases {
            assert_eq!(l.lemmatize(w), want, "{w}");
        }
    }

    #[test]
    fn exception_targets_are_fixpoints() {
        let l = Lemmatizer::default();
        for t in l.exception_targets() {
            assert_eq!(l.lemmatize(t), t);
        }
    }

    #[test]
    fn rejects_malformed_tsv() {
        assert!(Lemmatizer::from_tsv("went go\n").is_err());
        assert!(Lemmatizer::from_tsv("# c\n\nwent\tgo\n").is_ok());
    }

    proptest! {
        #[test]
        fn lemmatize_is_idempotent_and_nonempty(w in "[A-Za-z][a-z\\-]{0,14}") {
            let l = Lemmatizer::default();
            let once = l.lemmatize(&w);
            prop_assert!(!once.is_empty());
            prop_assert_eq!(l.lemmatize(&once), once);
        }
    }
}
