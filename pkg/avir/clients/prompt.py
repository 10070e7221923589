from typing import List, Optional, Sequence

from pydantic import BaseModel, Field

from avir.config import DEFAULT_INSTRUCTION
from avir.exceptions import InvalidInputError
from avir.selector.models import SelectionResult


class PromptSpec(BaseModel):
    """What the answer model sees: page images in document order, then text."""
    question_id: str = ""
    question: str
    page_indices: List[int] = Field(default_factory=list)
    page_refs: List[str] = Field(min_length=1)
    instruction: str = DEFAULT_INSTRUCTION

    def text(self) -> str:
        return f"{self.instruction}\n{self.question}"


def build_prompt(
    question: str,
    selected: SelectionResult,
    page_refs: Sequence[str],
    instruction: Optional[str] = None,
    question_id: str = "",
) -> PromptSpec:
    for index in selected.selected:
        if index >= len(page_refs):
            raise InvalidInputError(
                f"selected page {index} is out of range for a {len(page_refs)}-page document"
            )
    return PromptSpec(
        question_id=question_id,
        question=question,
        page_indices=list(selected.selected),
        page_refs=[page_refs[i] for i in selected.selected],
        instruction=instruction if instruction is not None else DEFAULT_INSTRUCTION,
    )
