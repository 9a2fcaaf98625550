//! Computational toolkit for tangential extremal principles: closed sets
//! with projection oracles, tangent and normal cone calculus, extremal
//! normal certificates for countable cone systems, and Frechet-normal
//! decompositions over cone intersections.
//!
//! The guide under `book/` walks through the concepts; its snippets are
//! compiled and executed as the doc-tests of [`book`], so guide and API
//! cannot drift apart. For the worked examples, see [`corpus`].

pub mod cone2;
pub mod corpus;
pub mod decomp;
pub mod fans;
pub mod functions;
pub mod linalg;
pub mod lp;
pub mod nnls;
pub mod poly;
pub mod sets;
pub mod solver;
pub mod tangency;
pub mod tol;
pub mod verdict;

/// Guide chapters as doc-tests. Each module's documentation is one
/// chapter of the mdbook under `book/src`; `cargo test --doc` runs every
/// snippet in them.
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/sets-and-projections.md")]
    pub mod sets_and_projections {}
    #[doc = include_str!("../../../book/src/cones-and-normals.md")]
    pub mod cones_and_normals {}
    #[doc = include_str!("../../../book/src/extremal-principle.md")]
    pub mod extremal_principle {}
    #[doc = include_str!("../../../book/src/decompositions.md")]
    pub mod decompositions {}
    #[doc = include_str!("../../../book/src/tangency-and-pipeline.md")]
    pub mod tangency_and_pipeline {}
    #[doc = include_str!("../../../book/src/cli-and-formats.md")]
    pub mod cli_and_formats {}
}
