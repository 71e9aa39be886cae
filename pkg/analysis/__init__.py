# Analysis modules: level export (GRDECL / VTK), per-level statistics, benchmarks
