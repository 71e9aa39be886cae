# Core modules: grid model, GRDECL I/O, synthetic meshes, errors
