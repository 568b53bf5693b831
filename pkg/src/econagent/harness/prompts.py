"""Fixed task-prompt construction; every run sees the same sentence skeleton."""

from __future__ import annotations

from .tasks import TaskSpec, method_label

_JSON_SENTENCE = (
    "At the end of the program, please print the coefficient, standard error "
    "and p-value of the effect in a json format like "
    '{"coefficient": 1, "standard_error": 2, "p-value": 0.5}, and output the '
    "json string as a .json file."
)


def build_prompt(task: TaskSpec) -> str:
    """Instantiate the fixed prompt template for one task.

    Only the boldface slots vary: method label, treatment, outcome, the
    control-variable list, the requirements sentence and the data path.
    The output is byte-identical for identical specs.
    """
    if task.controls:
        controls = (
            "You also need to control the following control variables: "
            + ", ".join(task.controls)
            + "."
        )
    else:
        controls = "There is no control variable."
    lines = [
        f"Please use the {method_label(task.method)} method to compute the "
        f"effect of {task.treatment} on {task.outcome}. {controls}"
    ]
    if task.requirements.strip():
        lines.append(
            "Besides, you need to consider the following requirements: "
            + task.requirements.strip()
        )
    lines.append(f"You could load the corresponding data from {task.data_path}.")
    lines.append(_JSON_SENTENCE)
    return "\n\n".join(lines) + "\n"
