use crate::alphabet::LetterId;
use crate::group::{ConstantsBundle, GroupContext, LinearFn};
use crate::slp::Slp;

pub(crate) fn constants() -> ConstantsBundle {
    ConstantsBundle {
        delta: 0,
        k: 3,
        l: 4,
        e_prime: 4,
        e1: 4,
        e2: 4,
        ff: LinearFn { slope: 1, intercept: 6 },
        lambda: 1,
        c: 2,
    }
}

/// `Z^2 * Z` with test constants.
pub(crate) fn g_star() -> GroupContext {
    GroupContext::from_ranks(&[2, 1], Some(constants())).unwrap()
}

pub(crate) fn word(ctx: &GroupContext, names: &str) -> Vec<LetterId> {
    ctx.alphabet().parse_word(names).unwrap()
}

pub(crate) fn parse(ctx: &GroupContext, text: &str) -> Slp {
    Slp::parse_with(text, ctx.alphabet().clone()).unwrap()
}

pub(crate) fn value(p: &Slp) -> Vec<LetterId> {
    p.decompress(1_000_000).unwrap()
}
