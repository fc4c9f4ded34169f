#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSpan {
    pub surface: String,
    pub start: usize,
    pub end: usize,
}

/// Splits on whitespace, then separates punctuation from words.
///
/// Words are maximal alphanumeric runs; a hyphen joins two alphanumeric
/// characters ("follow-up") and a period joins two digits ("2.5"). Every
/// other non-alphanumeric character becomes a token of its own.
pub fn tokenize(text: &str) -> Vec<TokenSpan> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_alphanumeric() {
            i += 1;
            while i < n {
                if chars[i].is_alphanumeric() {
                    i += 1;
                } else if i + 1 < n
                    && ((chars[i] == '-' && chars[i + 1].is_alphanumeric())
                        || (chars[i] == '.'
                            && chars[i - 1].is_ascii_digit()
                            && chars[i + 1].is_ascii_digit()))
                {
                    i += 2;
                } else {
                    break;
                }
            }
        } else {
            i += 1;
        }
        out.push(TokenSpan {
            surface: chars[start..i].iter().collect(),
            start,
            end: i,
        });
    }
    out
}
