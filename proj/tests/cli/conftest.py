import json
import os
import subprocess
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def meshforge_bin():
    path = os.environ.get("MESHFORGE_BIN", str(ROOT / "build" / "tools" / "meshforge"))
    if not Path(path).exists():
        pytest.skip(f"meshforge binary not found at {path}")
    return path


@pytest.fixture(scope="session")
def fixtures():
    return ROOT / "tests" / "fixtures"


@pytest.fixture(scope="session")
def schemas():
    from referencing import Registry, Resource

    resources = []
    for f in sorted((ROOT / "schemas").glob("*.schema.json")):
        doc = json.loads(f.read_text())
        resources.append((doc["$id"], Resource.from_contents(doc)))
    registry = Registry().with_resources(resources)

    def validate(instance, name):
        import jsonschema

        schema = registry.contents(f"meshforge/{name}.schema.json")
        jsonschema.Draft202012Validator(schema, registry=registry).validate(instance)

    return validate


@pytest.fixture
def run(meshforge_bin, tmp_path):
    def _run(*args, env=None, cwd=None):
        full_env = dict(os.environ)
        full_env.pop("MESHFORGE_LOG", None)
        full_env.update(env or {})
        return subprocess.run(
            [meshforge_bin, *map(str, args)],
            capture_output=True,
            text=True,
            env=full_env,
            cwd=cwd or tmp_path,
            timeout=300,
        )

    return _run
