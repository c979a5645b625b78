//! Zero-width steganographic codec.
//!
//! A payload is framed as `WJ bits… WJ`, where `WJ` is U+2060 WORD JOINER and
//! every payload bit (MSB first) becomes U+200C ZERO WIDTH NON-JOINER (0) or
//! U+200D ZERO WIDTH JOINER (1). Frame characters are only ever placed
//! *inside* words, one per slot, so a naive tokenizer sees every inserted
//! character as an extra word break while the rendered text is unchanged.
//!
//! Slots are handed out in rounds. Round `r` visits the words in document
//! order and takes interior offset `r + 1` of every word long enough to have
//! it. The first round therefore puts one character after the first letter
//! of every word of two or more letters, the second round after the second
//! letter of every word of three or more, and so on. Once the slots are
//! chosen, the frame characters fill them left to right.

use std::fmt;

use crate::textcore::{has_invisible, is_invisible};

pub const FRAME_MARKER: char = '\u{2060}';
pub const BIT_ZERO: char = '\u{200C}';
pub const BIT_ONE: char = '\u{200D}';
pub const MAX_PAYLOAD_BYTES: usize = 8192;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StegoError {
    #[error("carrier already contains invisible code points")]
    DirtyCarrier,
    #[error("carrier too small: frame needs {needed} slots, {available} available")]
    Capacity { needed: usize, available: usize },
    #[error("payload of {0} bytes exceeds the {MAX_PAYLOAD_BYTES}-byte limit")]
    PayloadTooLarge(usize),
    #[error("no complete frame found")]
    NoFrame,
    #[error("frame holds {0} bits, not a whole number of bytes")]
    RaggedFrame(usize),
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Payload(Vec<u8>);

impl Payload {
    pub fn new(bytes: Vec<u8>) -> Result<Self, StegoError> {
        if bytes.len() > MAX_PAYLOAD_BYTES {
            return Err(StegoError::PayloadTooLarge(bytes.len()));
        }
        Ok(Payload(bytes))
    }

    pub fn empty() -> Self {
        Payload(Vec::new())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    /// Number of slots the framed payload occupies.
    pub fn frame_len(&self) -> usize {
        8 * self.0.len() + 2
    }
}

impl fmt::Debug for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Payload({})", self.to_hex())
    }
}

impl TryFrom<&[u8]> for Payload {
    type Error = StegoError;

    fn try_from(bytes: &[u8]) -> Result<Self, Self::Error> {
        Payload::new(bytes.to_vec())
    }
}

/// The invisible character sequence encoding a payload.
pub fn frame(payload: &Payload) -> Vec<char> {
    let mut out = Vec::with_capacity(payload.frame_len());
    out.push(FRAME_MARKER);
    for byte in payload.as_bytes() {
        for bit in (0..8).rev() {
            out.push(if (byte >> bit) & 1 == 1 { BIT_ONE } else { BIT_ZERO });
        }
    }
    out.push(FRAME_MARKER);
    out
}

/// An insertion point: before the `offset`-th letter of word `word`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub word: usize,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbedPlan {
    pub slots: Vec<Slot>,
}

/// (first char index, letter count) of every alphabetic run.
fn words(chars: &[char]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_alphabetic() {
                i += 1;
            }
            out.push((start, i - start));
        } else {
            i += 1;
        }
    }
    out
}

pub fn capacity(text: &str) -> Result<usize, StegoError> {
    if has_invisible(text) {
        return Err(StegoError::DirtyCarrier);
    }
    let chars: Vec<char> = text.chars().collect();
    Ok(words(&chars).iter().map(|&(_, len)| len - 1).sum())
}

fn plan_for(word_lens: &[usize], needed: usize) -> EmbedPlan {
    let mut slots = Vec::with_capacity(needed);
    let longest = word_lens.iter().copied().max().unwrap_or(0);
    'rounds: for round in 0..longest.saturating_sub(1) {
        for (word, &len) in word_lens.iter().enumerate() {
            if slots.len() == needed {
                break 'rounds;
            }
            if len >= round + 2 {
                slots.push(Slot {
                    word,
                    offset: round + 1,
                });
            }
        }
    }
    EmbedPlan { slots }
}

/// The first `needed` slots of `text` in enumeration order.
pub fn plan(text: &str, needed: usize) -> Result<EmbedPlan, StegoError> {
    let available = capacity(text)?;
    if needed > available {
        return Err(StegoError::Capacity { needed, available });
    }
    let chars: Vec<char> = text.chars().collect();
    let lens: Vec<usize> = words(&chars).iter().map(|&(_, len)| len).collect();
    Ok(plan_for(&lens, needed))
}

pub fn embed(text: &str, payload: &Payload) -> Result<String, StegoError> {
    let framed = frame(payload);
    let chars: Vec<char> = text.chars().collect();
    if chars.iter().copied().any(is_invisible) {
        return Err(StegoError::DirtyCarrier);
    }
    let word_list = words(&chars);
    let available: usize = word_list.iter().map(|&(_, len)| len - 1).sum();
    if framed.len() > available {
        return Err(StegoError::Capacity {
            needed: framed.len(),
            available,
        });
    }
    let lens: Vec<usize> = word_list.iter().map(|&(_, len)| len).collect();
    let plan = plan_for(&lens, framed.len());

    // The rounds decide which slots are used; the frame is laid into them in
    // text order so that a left-to-right scan reads it back intact.
    let mut positions: Vec<usize> = plan
        .slots
        .iter()
        .map(|slot| word_list[slot.word].0 + slot.offset)
        .collect();
    positions.sort_unstable();
    // insert_before[i] = frame char placed immediately before visible char i
    let mut insert_before: Vec<Option<char>> = vec![None; chars.len()];
    for (&pos, &c) in positions.iter().zip(&framed) {
        insert_before[pos] = Some(c);
    }
    let mut out = String::with_capacity(text.len() + 3 * framed.len());
    for (c, inserted) in chars.iter().zip(&insert_before) {
        if let Some(z) = inserted {
            out.push(*z);
        }
        out.push(*c);
    }
    Ok(out)
}

pub fn extract(text: &str) -> Result<Payload, StegoError> {
    let mut in_frame = false;
    let mut bits: Vec<bool> = Vec::new();
    for c in text.chars() {
        match c {
            FRAME_MARKER if !in_frame => in_frame = true,
            FRAME_MARKER => return decode_bits(&bits),
            BIT_ZERO if in_frame => bits.push(false),
            BIT_ONE if in_frame => bits.push(true),
            _ => {}
        }
    }
    Err(StegoError::NoFrame)
}

fn decode_bits(bits: &[bool]) -> Result<Payload, StegoError> {
    if !bits.len().is_multiple_of(8) {
        return Err(StegoError::RaggedFrame(bits.len()));
    }
    let bytes = bits
        .chunks(8)
        .map(|byte| byte.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8))
        .collect();
    Payload::new(bytes)
}

/// Removes every invisible code point, leaving the rest untouched.
pub fn strip(text: &str) -> String {
    text.chars().filter(|&c| !is_invisible(c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textcore::{surfaces, TokenMode};

    fn payload(bytes: &[u8]) -> Payload {
        Payload::new(bytes.to_vec()).unwrap()
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(capacity("hello world"), Ok(8));
        assert_eq!(capacity("a b c"), Ok(0));
        assert_eq!(capacity(""), Ok(0));
        assert_eq!(capacity("it's 42 ok!"), Ok(2));
        assert_eq!(capacity("pri\u{200B}vacy"), Err(StegoError::DirtyCarrier));
    }

    #[test]
    fn capacity_error_arithmetic() {
        assert_eq!(
            embed("hello world", &payload(b"A")),
            Err(StegoError::Capacity {
                needed: 10,
                available: 8
            })
        );
    }

    #[test]
    fn empty_payload_is_two_markers() {
        let out = embed("hello world", &Payload::empty()).unwrap();
        let inserted: Vec<char> = out.chars().filter(|&c| is_invisible(c)).collect();
        assert_eq!(inserted, [FRAME_MARKER, FRAME_MARKER]);
        assert_eq!(out, "h\u{2060}ello w\u{2060}orld");
        assert_eq!(extract(&out), Ok(Payload::empty()));
    }

    #[test]
    fn frame_bits_msb_first() {
        let f = frame(&payload(&[0x41]));
        let z = BIT_ZERO;
        let o = BIT_ONE;
        assert_eq!(f, [FRAME_MARKER, z, o, z, z, z, z, z, o, FRAME_MARKER]);
    }

    #[test]
    fn slot_rounds() {
        // words: "abc"(2 slots) "de"(1) "fghi"(3)
        let p = plan("abc de fghi", 6).unwrap();
        let got: Vec<(usize, usize)> = p.slots.iter().map(|s| (s.word, s.offset)).collect();
        assert_eq!(got, [(0, 1), (1, 1), (2, 1), (0, 2), (2, 2), (2, 3)]);
        assert!(plan("abc de fghi", 7).is_err());
    }

    #[test]
    fn every_insert_is_interior() {
        let text = "The quick brown fox, it jumps!";
        let out = embed(text, &payload(b"x")).unwrap();
        let chars: Vec<char> = out.chars().collect();
        for (i, &c) in chars.iter().enumerate() {
            if is_invisible(c) {
                assert!(i > 0 && chars[i - 1].is_alphabetic());
                assert!(chars[i + 1].is_alphabetic() || is_invisible(chars[i + 1]));
            }
        }
    }

    #[test]
    fn extract_errors() {
        assert_eq!(extract("plain text"), Err(StegoError::NoFrame));
        assert_eq!(extract("a\u{2060}b\u{200C}c"), Err(StegoError::NoFrame));
        let seven: String = std::iter::once(FRAME_MARKER)
            .chain(std::iter::repeat_n(BIT_ONE, 7))
            .chain(std::iter::once(FRAME_MARKER))
            .collect();
        assert_eq!(extract(&seven), Err(StegoError::RaggedFrame(7)));
    }

    #[test]
    fn extract_takes_first_frame() {
        let a: String = frame(&payload(&[1])).into_iter().collect();
        let b: String = frame(&payload(&[2])).into_iter().collect();
        assert_eq!(extract(&format!("x{a}y{b}")), Ok(payload(&[1])));
    }

    #[test]
    fn strip_examples() {
        assert_eq!(strip("plain"), "plain");
        assert_eq!(strip("pri\u{200B}vacy"), "privacy");
        assert_eq!(strip("\u{FEFF}a\u{200D}b\u{2060}"), "ab");
    }

    #[test]
    fn payload_cap() {
        assert!(Payload::new(vec![0; MAX_PAYLOAD_BYTES]).is_ok());
        assert_eq!(
            Payload::new(vec![0; MAX_PAYLOAD_BYTES + 1]),
            Err(StegoError::PayloadTooLarge(MAX_PAYLOAD_BYTES + 1))
        );
    }

    #[test]
    fn deterministic() {
        let t = "steganography hides things in plain sight";
        let p = payload(b"k");
        assert_eq!(embed(t, &p), embed(t, &p));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn carrier() -> impl Strategy<Value = String> {
            proptest::collection::vec("[a-zA-Zéß]{1,12}", 1..40).prop_flat_map(|words| {
                let n = words.len();
                (
                    Just(words),
                    proptest::collection::vec(
                        prop_oneof![Just(" "), Just(", "), Just(". "), Just("\n"), Just(" - ")],
                        n,
                    ),
                )
                    .prop_map(|(w, seps)| w.iter().zip(seps).map(|(w, s)| format!("{w}{s}")).collect::<String>())
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(256))]

            #[test]
            fn round_trip(text in carrier(), bytes in proptest::collection::vec(any::<u8>(), 0..12)) {
                let p = payload(&bytes);
                let cap = capacity(&text).unwrap();
                match embed(&text, &p) {
                    Ok(out) => {
                        prop_assert!(p.frame_len() <= cap);
                        prop_assert_eq!(extract(&out).unwrap(), p.clone());
                        prop_assert_eq!(strip(&out), text.clone());
                        prop_assert_eq!(
                            surfaces(&out, TokenMode::Raw).len(),
                            surfaces(&text, TokenMode::Raw).len() + p.frame_len()
                        );
                        prop_assert_eq!(surfaces(&out, TokenMode::Sanitized), surfaces(&text, TokenMode::Sanitized));
                    }
                    Err(StegoError::Capacity { needed, available }) => {
                        prop_assert_eq!(needed, p.frame_len());
                        prop_assert_eq!(available, cap);
                        prop_assert!(needed > available);
                    }
                    Err(e) => prop_assert!(false, "unexpected {e}"),
                }
            }
        }
    }
}
