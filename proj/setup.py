import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

sources = sorted(glob.glob("src/*.cpp")) + ["src/python/bindings.cpp"]

ext_modules = [
    Pybind11Extension(
        "fgbp._core",
        sources,
        include_dirs=["include", "vendor"],
        cxx_std=20,
    )
]

setup(ext_modules=ext_modules, cmdclass={"build_ext": build_ext})
