//! SMOG readability grade.
//!
//! `grade = 1.043 * sqrt(polysyllabic_words * 30 / sentences) + 3.1291`
//! where a polysyllabic word has three or more syllables.
//!
//! Sentences end at a run of `.`, `!` or `?` followed by whitespace or end of
//! text; an unterminated trailing fragment is not counted (known limitation
//! for abbreviations). Syllables are counted as vowel groups (aeiouy) with a
//! silent final `e` rule; the heuristic is frozen by the golden tests below.

use super::StatsError;

/// SMOG index of a text. Errors when no sentence terminator is found.
pub fn smog_index(text: &str) -> Result<f64, StatsError> {
    let sentences = count_sentences(text);
    if sentences == 0 {
        return Err(StatsError::NoSentences);
    }
    let polysyllabic = text
        .split_whitespace()
        .filter(|w| syllables(w) >= 3)
        .count();
    Ok(1.043 * ((polysyllabic as f64) * 30.0 / (sentences as f64)).sqrt() + 3.1291)
}

/// Number of sentence terminators (`[.!?]+` followed by whitespace or EOF).
pub fn count_sentences(text: &str) -> usize {
    let bytes = text.as_bytes();
    let mut count = 0;
    let mut i = 0;
    while i < bytes.len() {
        if matches!(bytes[i], b'.' | b'!' | b'?') {
            while i < bytes.len() && matches!(bytes[i], b'.' | b'!' | b'?') {
                i += 1;
            }
            if i >= bytes.len() || bytes[i].is_ascii_whitespace() {
                count += 1;
            }
        } else {
            i += 1;
        }
    }
    count
}

/// Heuristic syllable count of a single word: number of vowel groups, with a
/// final silent `e` discounted unless it ends a consonant-`le` pair. Words
/// with any letters count at least one syllable.
pub fn syllables(word: &str) -> usize {
    let w: Vec<char> = word
        .chars()
        .filter(|c| c.is_ascii_alphabetic())
        .map(|c| c.to_ascii_lowercase())
        .collect();
    if w.is_empty() {
        return 0;
    }
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut count = 0;
    let mut prev_vowel = false;
    for &c in &w {
        let v = is_vowel(c);
        if v && !prev_vowel {
            count += 1;
        }
        prev_vowel = v;
    }
    let n = w.len();
    if n >= 2 && w[n - 1] == 'e' {
        let consonant_le = n >= 3 && w[n - 2] == 'l' && !is_vowel(w[n - 3]);
        if !consonant_le && count > 1 {
            count -= 1;
        }
    }
    count.max(1)
}
