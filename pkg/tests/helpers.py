"""Shared test data: sample crime-report narratives (one per label) and planted corpora."""

import numpy as np

from labeltopics import corpus, synthetic, weighting

NARRATIVES = [
    ("Homicide", "VICT IS A [GANG NAME] GANG MEMBER WAS STANDING ON SIDEWALK SPRAY PAINTING GRAFFITI "
                 "SUSPS DROVE BY THE VICT FIRED SHOTS AT VICT"),
    ("Assault", "VICT AND SUBJ ARE MTHR DAUGHTER VICT ATPT TO DISCIPLINE SUBJ SUBJ BECAME ANGRY AND ATPT TO CUT VICT"),
    ("Robbery", "SUSP ENTERED LOCATION PRODUCED HANDGUN DEMANDED MONEY FROM REGISTER REMOVED PROPERTY FROM "
                "LOCATION AND FLED TO UNKNOWN LOCATION"),
    ("Burglary", "UNK SUSP ENTERED VICS RESID BY BREAKING SCREEN ON WINDOW WALKED THROUGH THE RESID EXITED "
                 "REAR DOOR AND ENTERED DETACHED GARAGE SUSP EXITED WITH PROPERT"),
    ("Burglary-theft from Vehicle", "SUSP USING PORCELAIN CHIPS BROKE VEHS WINDOW PRIOR TO SUSP GAINING ENTRY "
                                    "SUSP FLED THE LOC"),
    ("Motor Vehicle Theft", "SUSP ENTERED VIC VEH WITH UNK PRY TOOL AND REMOVED PROP FROM VEH SUSP PUNCHED "
                            "IGNITION SWITCH"),
    ("Theft", "S ENTERED CLOTHING STORE AND TOOK APPROX 20 BLUE TSHIRT AND THEN FLED LOCATION WITHOUT PAYING"),
]


def planted(spec: synthetic.SyntheticSpec, stem: bool = True):
    """Tokenized, pruned planted corpus with its weighted matrix and planted topics."""
    docs, topics = synthetic.generate(spec)
    toks = corpus.tokenize_documents(docs, stem_words=stem)
    kept, vocab = corpus.prune_corpus(toks)
    keep_ids = {d.id for d in kept}
    topics = np.array([t for d, t in zip(docs, topics) if d.id in keep_ids])
    A = weighting.tfidf(weighting.count_matrix(kept, vocab))
    return kept, vocab, A, topics
