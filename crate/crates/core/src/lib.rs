//! Price of anarchy of simultaneous first-price auctions with autobidding
//! agents that mix value and utility maximization (a type `t` in `[0, 1]`
//! weights the payment in the objective), under ROI and budget constraints
//! and with reserve prices.
//!
//! Module map:
//! - [`special`]: Lambert W and the threshold constants.
//! - [`valuation`], [`auction`], [`welfare`]: markets, the auction engine,
//!   OPT, liquid welfare and the budget-free proxy instance.
//! - [`profile`]: finite, product and coupled bid distributions with exact
//!   expectations.
//! - [`equilibrium`] (with [`mixture`]): feasibility and tri-state CCE / CE /
//!   mixed Nash verification with witnesses.
//! - [`smoothness`]: smoothness deviations, calibration and the program whose
//!   value gives the upper bounds; [`bounds`] holds the closed forms.
//! - [`constructions`]: lower-bound instances and their equilibria.
//! - [`learning`], [`dynamics`], [`probe`]: repeated auctions with Hedge
//!   bidders, best-response dynamics and a brute-force ratio probe.
//!
//! ```
//! use autobid_poa::bounds::bound_p;
//! assert!((bound_p(1.0) - 2.1885).abs() < 5e-4);
//! ```

pub mod auction;
pub mod bounds;
pub mod constructions;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod ext;
pub mod learning;
pub mod mixture;
pub mod probe;
pub mod profile;
pub mod smoothness;
pub mod special;
pub mod valuation;
pub mod welfare;
