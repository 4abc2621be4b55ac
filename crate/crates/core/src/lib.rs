// Copyright 2026 The fkgfold Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Exact finite-measure toolkit for folding, random-cluster representations,
//! disjoint-occurrence functionals and positive/negative association checks.

pub mod association;
pub mod error;
pub mod event;
pub mod folding;
pub mod gen;
pub mod measure;
pub mod occurrence;
pub mod rational;
pub mod rcr;
pub mod space;
pub mod suite;

pub use error::{Error, Result};
pub use event::Event;
pub use measure::Measure;
pub use space::{BetaPair, Config, SiteSpace};
