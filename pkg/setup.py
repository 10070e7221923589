from setuptools import setup, find_packages

setup(
    name="avir",
    version="1.0.0",
    description="Adaptive page selection and evaluation harness for multi-page document QA",
    author="Sppqq",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    python_requires=">=3.10",
    install_requires=[
        "fastapi==0.115.0",
        "uvicorn[standard]==0.30.6",
        "pydantic==2.9.2",
        "pydantic-settings==2.5.2",
        "python-dotenv==1.0.1",
        "httpx==0.27.2",
        "openai==1.51.0",
        "tenacity==9.0.0",
        "rapidfuzz==3.10.0",
    ],
    extras_require={
        "test": ["pytest==8.3.3"],
    },
    entry_points={
        "console_scripts": [
            "avir=avir.main:main",
        ],
    },
)
