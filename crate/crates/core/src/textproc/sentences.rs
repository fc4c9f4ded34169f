/// Half-open character span of one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SentenceSpan {
    pub index: usize,
    pub start: usize,
    pub end: usize,
}

// Lowercased words that never end a sentence when followed by '.'.
const ABBREVIATIONS: &[&str] = &[
    "dr", "mr", "mrs", "ms", "prof", "mg", "mcg", "ml", "kg", "cm", "mm", "vs", "etc", "e.g",
    "i.e", "approx", "no", "st", "fig", "dept", "tel", "ref",
];

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closing(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}')
}

fn guarded(chars: &[char], dot: usize) -> bool {
    let mut s = dot;
    while s > 0 && !chars[s - 1].is_whitespace() {
        s -= 1;
    }
    let word: String = chars[s..dot]
        .iter()
        .skip_while(|c| !c.is_alphanumeric())
        .collect::<String>()
        .to_lowercase();
    if word.chars().count() == 1 && word.chars().all(char::is_alphabetic) {
        // initials such as "J. Smith"
        return true;
    }
    ABBREVIATIONS.contains(&word.as_str())
}

/// Splits text into sentences.
///
/// A sentence ends at `.`, `!` or `?` (plus any closing quotes or brackets)
/// followed by end of text, or by whitespace and then an uppercase letter or
/// a digit. A `.` after a listed abbreviation or a single-letter initial does
/// not end a sentence; decimal points never do because no whitespace follows
/// them. A blank line always ends a sentence. Spans exclude surrounding
/// whitespace and together cover every non-whitespace character.
pub fn split_sentences(text: &str) -> Vec<SentenceSpan> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let mut out = Vec::new();
    let mut i = 0;
    let push = |out: &mut Vec<SentenceSpan>, start: usize, mut end: usize| {
        while end > start && chars[end - 1].is_whitespace() {
            end -= 1;
        }
        if end > start {
            out.push(SentenceSpan { index: out.len(), start, end });
        }
    };
    while i < n {
        while i < n && chars[i].is_whitespace() {
            i += 1;
        }
        if i == n {
            break;
        }
        let start = i;
        let mut j = i;
        let mut end = n;
        while j < n {
            let c = chars[j];
            if is_terminal(c) {
                let mut k = j + 1;
                while k < n && (is_terminal(chars[k]) || is_closing(chars[k])) {
                    k += 1;
                }
                if k == n {
                    end = n;
                    break;
                }
                if chars[k].is_whitespace() {
                    let mut m = k;
                    while m < n && chars[m].is_whitespace() {
                        m += 1;
                    }
                    let next_starts = m == n || chars[m].is_uppercase() || chars[m].is_ascii_digit();
                    let blank_line = chars[k..m].iter().filter(|&&c| c == '\n').count() >= 2;
                    if blank_line || (next_starts && !(c == '.' && k == j + 1 && guarded(&chars, j))) {
                        end = k;
                        break;
                    }
                }
                j = k;
                continue;
            }
            if c == '\n' {
                let mut m = j;
                while m < n && chars[m].is_whitespace() {
                    m += 1;
                }
                if chars[j..m].iter().filter(|&&c| c == '\n').count() >= 2 {
                    end = j;
                    break;
                }
                j = m;
                continue;
            }
            j += 1;
        }
        push(&mut out, start, end);
        i = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(t: &str) -> Vec<String> {
        split_sentences(t)
            .iter()
            .map(|s| t.chars().skip(s.start).take(s.end - s.start).collect())
            .collect()
    }

    #[test]
    fn two_simple_sentences() {
        assert_eq!(
            texts("She remains well. Mammogram was clear."),
            vec!["She remains well.", "Mammogram was clear."]
        );
    }

    #[test]
    fn empty_and_whitespace() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("  \n\t ").is_empty());
    }

    #[test]
    fn decimal_point_is_not_a_boundary() {
        assert_eq!(
            texts("Dose was 2.5 mg daily. Next review in 12 months."),
            vec!["Dose was 2.5 mg daily.", "Next review in 12 months."]
        );
    }

    #[test]
    fn abbreviations_and_initials() {
        assert_eq!(
            texts("Seen by Dr. Jones today. Letter to J. Smith sent."),
            vec!["Seen by Dr. Jones today.", "Letter to J. Smith sent."]
        );
    }

    #[test]
    fn lowercase_continuation_and_other_terminals() {
        assert_eq!(texts("Stable. then reviewed! Why? OK"), vec!["Stable. then reviewed!", "Why?", "OK"]);
        assert_eq!(texts("She said \"stop.\" Then left."), vec!["She said \"stop.\"", "Then left."]);
    }

    #[test]
    fn blank_line_ends_a_sentence() {
        assert_eq!(texts("Dear Dr Smith\n\nthank you"), vec!["Dear Dr Smith", "thank you"]);
    }

    #[test]
    fn spans_cover_all_non_whitespace() {
        let t = "  A b. C d!  e f? G\n\nh.i 2.5. 7 days";
        let chars: Vec<char> = t.chars().collect();
        let spans = split_sentences(t);
        let mut covered = vec![false; chars.len()];
        let mut prev_end = 0;
        for s in &spans {
            assert!(s.start >= prev_end && s.start < s.end);
            prev_end = s.end;
            for c in covered.iter_mut().take(s.end).skip(s.start) {
                *c = true;
            }
        }
        for (c, cov) in chars.iter().zip(covered) {
            assert!(cov || c.is_whitespace());
        }
    }
}
