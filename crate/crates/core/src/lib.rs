pub mod bolza;
pub mod exact;
pub mod flatsurf;
pub mod geom;
pub mod metric_graph;
pub mod report;
pub mod voronoi;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/surfaces.md")]
    mod surfaces {}
    #[doc = include_str!("../../../book/src/bolza.md")]
    mod bolza {}
    #[doc = include_str!("../../../book/src/systole.md")]
    mod systole {}
    #[doc = include_str!("../../../book/src/voronoi.md")]
    mod voronoi {}
}
