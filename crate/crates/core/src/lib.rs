pub mod error;
pub mod extract;
pub mod group;
pub mod interval;
pub mod radial;
pub mod ring;
pub mod ser;
pub mod spectral;

pub use error::{Error, Result};
pub use group::{GenSet, GroupPresentation, Letter, Syllable, Word};
pub use interval::Interval;
pub use radial::{RadialElement, SphereProfile};
pub use ring::{MarkovOperator, RingElement};
pub use spectral::{Direction, EstimateReport, Method, MomentSequence};
