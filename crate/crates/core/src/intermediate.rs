//! The `lex` and `ali` intermediate sequences.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::ibm1::{DirectionalAlignment, Direction};
use crate::symmetrize::BilingualLexicon;
use crate::corpus::Sentence;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntermediateError {
    /// `ali` needs the target-to-source alignment.
    WrongDirection(Direction),
    SourceLength { lex: usize, alignment: usize },
    TargetLength { expected: usize, alignment: usize },
    LinkOutOfRange { target: usize, link: usize, lex_len: usize },
}

impl fmt::Display for IntermediateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntermediateError::WrongDirection(d) => {
                write!(f, "ali needs a tgt2src alignment, got {d}")
            }
            IntermediateError::SourceLength { lex, alignment } => write!(
                f,
                "lex has {lex} tokens but the alignment refers to a source of {alignment} words"
            ),
            IntermediateError::TargetLength { expected, alignment } => {
                write!(f, "target has {expected} words but the alignment covers {alignment}")
            }
            IntermediateError::LinkOutOfRange { target, link, lex_len } => write!(
                f,
                "target position {target} links to {link}, outside lex of length {lex_len}"
            ),
        }
    }
}

impl core::error::Error for IntermediateError {}

/// The four sequences of one training example.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SegmentSet {
    pub source: Sentence,
    pub lex: Sentence,
    pub ali: Sentence,
    pub tgt: Sentence,
}

/// Word-for-word translation; words missing from the lexicon are copied.
pub fn make_lex(source: &Sentence, lexicon: &BilingualLexicon) -> Sentence {
    let tokens = source
        .iter()
        .map(|w| String::from(lexicon.translate(w).unwrap_or(w)))
        .collect();
    Sentence::from_trusted(tokens)
}

/// Reorders `lex` by walking the target left to right and emitting the `lex`
/// token each target word is linked to. NULL-linked target words are skipped;
/// a source position linked from several target words is repeated.
pub fn make_ali(
    lex: &Sentence,
    tgt_to_src: &DirectionalAlignment,
    target_length: usize,
) -> Result<Sentence, IntermediateError> {
    if tgt_to_src.direction() != Direction::TgtToSrc {
        return Err(IntermediateError::WrongDirection(tgt_to_src.direction()));
    }
    if tgt_to_src.conditioning_len() != lex.len() {
        return Err(IntermediateError::SourceLength {
            lex: lex.len(),
            alignment: tgt_to_src.conditioning_len(),
        });
    }
    if tgt_to_src.len() != target_length {
        return Err(IntermediateError::TargetLength {
            expected: target_length,
            alignment: tgt_to_src.len(),
        });
    }
    let mut tokens = Vec::with_capacity(target_length);
    for (target, link) in tgt_to_src.links().iter().enumerate() {
        if let Some(i) = *link {
            let token = lex.tokens().get(i).ok_or(IntermediateError::LinkOutOfRange {
                target,
                link: i,
                lex_len: lex.len(),
            })?;
            tokens.push(token.clone());
        }
    }
    Ok(Sentence::from_trusted(tokens))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn s(text: &str) -> Sentence {
        Sentence::parse(text).unwrap()
    }

    fn lexicon(entries: &[(&str, &str)]) -> BilingualLexicon {
        BilingualLexicon::from_entries(
            entries.iter().map(|(a, b)| (a.to_string(), b.to_string(), 1)),
            entries.len() as u64,
        )
    }

    fn t2s(len: usize, links: Vec<Option<usize>>) -> DirectionalAlignment {
        DirectionalAlignment::new(Direction::TgtToSrc, len, links).unwrap()
    }

    #[test]
    fn lex_translation_and_copy() {
        let lx = lexicon(&[("das", "the"), ("haus", "house")]);
        assert_eq!(make_lex(&s("das haus"), &lx), s("the house"));
        let lx = lexicon(&[("das", "the")]);
        assert_eq!(make_lex(&s("das xyz"), &lx), s("the xyz"));
        assert_eq!(make_lex(&s("das xyz"), &BilingualLexicon::default()), s("das xyz"));
    }

    #[test]
    fn ali_rule() {
        let lex = s("L0 L1 L2");
        assert_eq!(make_ali(&lex, &t2s(3, vec![Some(2), None, Some(0)]), 3).unwrap(), s("L2 L0"));
        assert_eq!(make_ali(&lex, &t2s(3, vec![Some(0), Some(1), Some(2)]), 3).unwrap(), lex);
        let lex = s("L0 L1");
        assert_eq!(make_ali(&lex, &t2s(2, vec![Some(1), Some(1)]), 2).unwrap(), s("L1 L1"));
    }

    #[test]
    fn ali_all_null_is_empty() {
        let lex = s("a b");
        assert!(make_ali(&lex, &t2s(2, vec![None, None]), 2).unwrap().is_empty());
    }

    #[test]
    fn ali_structural_errors() {
        let lex = s("a b");
        assert!(matches!(
            make_ali(&lex, &t2s(3, vec![Some(2)]), 1),
            Err(IntermediateError::SourceLength { lex: 2, alignment: 3 })
        ));
        assert!(matches!(
            make_ali(&lex, &t2s(2, vec![Some(0)]), 2),
            Err(IntermediateError::TargetLength { .. })
        ));
        let wrong = DirectionalAlignment::new(Direction::SrcToTgt, 1, vec![Some(0), Some(0)]).unwrap();
        assert!(matches!(make_ali(&lex, &wrong, 1), Err(IntermediateError::WrongDirection(_))));
    }
}
