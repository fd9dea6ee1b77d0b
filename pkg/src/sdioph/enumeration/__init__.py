from .balls import COVER_SCALE, REGION_SCALE, RadiusSchedule, SBall, in_ball, radius_schedule, snap_radius
from .cover import Cover, PlacePoint, cover_compact, next_in_support, real_centers
from .search import (
    GUARD,
    Approximant,
    CampaignReport,
    Power,
    PsiHitTable,
    SimplexVerdict,
    Witness,
    count_candidates,
    dirichlet_bound,
    dirichlet_witness,
    dirichlet_witnesses,
    enumerate_rationals,
    enumerate_rationals_naive,
    psi_witnesses,
    simplex_campaign,
    simplex_verdict,
    verify_simplex_lemma,
    witnesses_to_jsonl,
)
