//! Small hand-built representations used in documentation, examples and
//! tests.

use crate::harness::corpus::{parse_corpus, Corpus};
use crate::lfg::Representation;

/// The indexed representation of *Kim eats*.
pub const KIM_EATS: &str = "#id: 1
#sent: Kim eats
#tree: (S.1 (NP.2 Kim.2) (VP.1 eats.1))
#fs:
1 -> [(SUBJ 2) (TENSE PRES) (PRED 'eat<SUBJ>')]
2 -> [(PRED 'Kim') (NUM SG)]
";

pub fn kim_eats() -> Representation {
    parse_corpus(KIM_EATS).expect("bundled sample parses").entries.remove(0).repr
}

/// Five analyses with a prepositional phrase attached either to the verb
/// phrase or to the object noun phrase.
pub const PP_ATTACHMENT: &str = "#id: pp1
#sent: Kim sees Sandy
#tree: (S.1 (NP.2 Kim.2) (VP.1 (V.1 sees.1) (NP.3 Sandy.3)))
#fs:
1 -> [(PRED 'see<SUBJ,OBJ>') (TENSE PRES) (SUBJ 2) (OBJ 3)]
2 -> [(PRED 'Kim') (NUM SG)]
3 -> [(PRED 'Sandy') (NUM SG)]

#id: pp2
#sent: Sandy sees Kim with Max
#tree: (S.1 (NP.2 Sandy.2) (VP.1 (V.1 sees.1) (NP.3 Kim.3) (PP.4 (P.4 with.4) (NP.5 Max.5))))
#fs:
1 -> [(PRED 'see<SUBJ,OBJ>') (TENSE PRES) (SUBJ 2) (OBJ 3) (ADJUNCT 4)]
2 -> [(PRED 'Sandy') (NUM SG)]
3 -> [(PRED 'Kim') (NUM SG)]
4 -> [(PRED 'with<OBJ>') (OBJ 5)]
5 -> [(PRED 'Max') (NUM SG)]

#id: pp3
#sent: Max sees Sandy with Kim
#tree: (S.1 (NP.2 Max.2) (VP.1 (V.1 sees.1) (NP.3 (NP.3 Sandy.3) (PP.4 (P.4 with.4) (NP.5 Kim.5)))))
#fs:
1 -> [(PRED 'see<SUBJ,OBJ>') (TENSE PRES) (SUBJ 2) (OBJ 3)]
2 -> [(PRED 'Max') (NUM SG)]
3 -> [(PRED 'Sandy') (NUM SG) (ADJUNCT 4)]
4 -> [(PRED 'with<OBJ>') (OBJ 5)]
5 -> [(PRED 'Kim') (NUM SG)]

#id: pp4
#sent: Max sees Kim
#tree: (S.1 (NP.2 Max.2) (VP.1 (V.1 sees.1) (NP.3 Kim.3)))
#fs:
1 -> [(PRED 'see<SUBJ,OBJ>') (TENSE PRES) (SUBJ 2) (OBJ 3)]
2 -> [(PRED 'Max') (NUM SG)]
3 -> [(PRED 'Kim') (NUM SG)]

#id: pp5
#sent: Sandy sees Max with Kim
#tree: (S.1 (NP.2 Sandy.2) (VP.1 (V.1 sees.1) (NP.3 Max.3) (PP.4 (P.4 with.4) (NP.5 Kim.5))))
#fs:
1 -> [(PRED 'see<SUBJ,OBJ>') (TENSE PRES) (SUBJ 2) (OBJ 3) (ADJUNCT 4)]
2 -> [(PRED 'Sandy') (NUM SG)]
3 -> [(PRED 'Max') (NUM SG)]
4 -> [(PRED 'with<OBJ>') (OBJ 5)]
5 -> [(PRED 'Kim') (NUM SG)]
";

pub fn pp_attachment() -> Corpus {
    parse_corpus(PP_ATTACHMENT).expect("bundled sample parses")
}

/// Forty annotated sentences with prepositional-phrase attachment and
/// relative-clause ambiguities, used by the experiments.
pub const SYNTHETIC: &str = include_str!("../data/synthetic.corpus");

pub fn synthetic() -> Corpus {
    parse_corpus(SYNTHETIC).expect("bundled corpus parses")
}
