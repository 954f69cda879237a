//! Word-boundary-aware character 3-grams.
//!
//! The input is lowercased and split at whitespace; each word `w` is padded
//! to `" " + w + " "` and a window of three chars slides over it. Grams never
//! cross word boundaries, and a one-char word still yields `" a "`.

/// A 3-gram packed into one integer: 21 bits per char.
pub type GramKey = u64;

const CHAR_BITS: u32 = 21;
const CHAR_MASK: u64 = (1 << CHAR_BITS) - 1;

pub fn pack(a: char, b: char, c: char) -> GramKey {
    ((a as u64) << (2 * CHAR_BITS)) | ((b as u64) << CHAR_BITS) | c as u64
}

pub fn unpack(key: GramKey) -> Option<[char; 3]> {
    Some([
        char::from_u32(((key >> (2 * CHAR_BITS)) & CHAR_MASK) as u32)?,
        char::from_u32(((key >> CHAR_BITS) & CHAR_MASK) as u32)?,
        char::from_u32((key & CHAR_MASK) as u32)?,
    ])
}

pub fn gram_string(key: GramKey) -> String {
    unpack(key).map(|c| c.iter().collect()).unwrap_or_default()
}

/// Calls `f` once per gram occurrence, in text order.
pub fn for_each_gram(s: &str, mut f: impl FnMut(GramKey)) {
    let mut buf: Vec<char> = Vec::new();
    for word in s.split_whitespace() {
        buf.clear();
        buf.push(' ');
        buf.extend(word.chars().flat_map(char::to_lowercase));
        buf.push(' ');
        for w in buf.windows(3) {
            f(pack(w[0], w[1], w[2]));
        }
    }
}

/// All gram occurrences of `s` (a multiset, in text order).
pub fn extract_3grams(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    for_each_gram(s, |k| out.push(gram_string(k)));
    out
}

/// Gram counts of `s`, sorted by key.
pub fn gram_counts(s: &str) -> Vec<(GramKey, u32)> {
    let mut keys = Vec::new();
    for_each_gram(s, |k| keys.push(k));
    keys.sort_unstable();
    let mut out: Vec<(GramKey, u32)> = Vec::with_capacity(keys.len());
    for k in keys {
        match out.last_mut() {
            Some((last, n)) if *last == k => *n += 1,
            _ => out.push((k, 1)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn two_char_word() {
        assert_eq!(extract_3grams("ab"), [" ab", "ab "]);
    }

    #[test]
    fn empty_and_blank() {
        assert!(extract_3grams("").is_empty());
        assert!(extract_3grams("  \t ").is_empty());
    }

    #[test]
    fn lung_cancer() {
        let grams = extract_3grams("lung cancer");
        assert_eq!(
            grams,
            [" lu", "lun", "ung", "ng ", " ca", "can", "anc", "nce", "cer", "er "]
        );
        let distinct: BTreeSet<_> = grams.iter().collect();
        assert_eq!(distinct.len(), 10);
    }

    #[test]
    fn lowercases_and_ignores_extra_space() {
        assert_eq!(extract_3grams("  IL "), [" il", "il "]);
        assert_eq!(extract_3grams("a"), [" a "]);
    }

    #[test]
    fn counts_repeats() {
        let counts = gram_counts("aaaa");
        // " aa", "aaa" x2, "aa "
        let as_str: Vec<_> = counts.iter().map(|&(k, n)| (gram_string(k), n)).collect();
        assert!(as_str.contains(&("aaa".to_string(), 2)));
        assert_eq!(as_str.iter().map(|(_, n)| n).sum::<u32>(), 4);
    }

    #[test]
    fn pack_roundtrip_non_ascii() {
        let k = pack('β', '-', '\u{10FFFF}');
        assert_eq!(unpack(k), Some(['β', '-', '\u{10FFFF}']));
    }
}
