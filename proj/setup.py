"""Builds the _core extension by delegating to the project's CMake build."""

import os
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name: str, sourcedir: str = "") -> None:
        super().__init__(name, sources=[])
        self.sourcedir = os.fspath(Path(sourcedir).resolve())


class CMakeBuild(build_ext):
    def build_extension(self, ext: CMakeExtension) -> None:
        out_dir = Path(self.get_ext_fullpath(ext.name)).parent.resolve()
        build_dir = Path(self.build_temp).resolve() / ext.name
        build_dir.mkdir(parents=True, exist_ok=True)

        configure = [
            "cmake",
            "-S", ext.sourcedir,
            "-B", str(build_dir),
            f"-DPython_EXECUTABLE={sys.executable}",
            f"-DDEBUNC_PY_OUTPUT_DIR={out_dir}",
            "-DCMAKE_BUILD_TYPE=Release",
            "-DDEBUNC_BUILD_TESTS=OFF",
        ]
        subprocess.run(configure, check=True)
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_core",
             "-j", str(os.cpu_count() or 2)],
            check=True,
        )


setup(
    ext_modules=[CMakeExtension("debunc._core")],
    cmdclass={"build_ext": CMakeBuild},
)
