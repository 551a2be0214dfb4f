"""Write every zoo model and its shipped candidates as plain text files."""

from __future__ import annotations

from pathlib import Path

from ..expr import parse_expr
from ..io import dumps_candidate, dumps_cattaneo_params, dumps_cattaneo_spec, dumps_model
from .cattaneo import CattaneoSblParams, cattaneo_internal_energy, cattaneo_sbl, cattaneo_system, default_spec
from .maxwell import divergence_candidate, maxwell_system, poynting_candidate
from .scalar import burgers, scalar_sbl
from .twofield import table_one_case


def zoo_files() -> dict:
    """Mapping of file name to file content."""
    files = {}
    b = burgers(Pi="-u")
    files["burgers.model"] = dumps_model(b)
    files["burgers_energy.sbl"] = dumps_candidate(scalar_sbl("u^2/2", "u^2/2", 0.0, "-u"))

    spec = default_spec()
    entropy = CattaneoSblParams(lambda0_hat=parse_expr("-theta"))
    files["cattaneo.spec"] = dumps_cattaneo_spec(spec)
    files["cattaneo_entropy.params"] = dumps_cattaneo_params(entropy)
    files["cattaneo_antientropy.params"] = dumps_cattaneo_params(
        CattaneoSblParams(lambda0_hat=parse_expr("theta"))
    )
    sys = cattaneo_system(spec, cattaneo_internal_energy(spec, entropy))
    files["cattaneo.model"] = dumps_model(sys)
    files["cattaneo_entropy.sbl"] = dumps_candidate(cattaneo_sbl(spec, entropy))

    m = maxwell_system()
    files["maxwell.model"] = dumps_model(m)
    files["maxwell_energy.sbl"] = dumps_candidate(poynting_candidate())
    files["maxwell_divE.sbl"] = dumps_candidate(divergence_candidate("E"))

    for row in range(1, 6):
        case = table_one_case(row)
        files[f"table1_row{row}.model"] = dumps_model(case.system)
    return files


def export_zoo(out_dir) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in sorted(zoo_files().items()):
        path = out / name
        path.write_text(text, encoding="utf-8")
        written.append(str(path))
    return written
