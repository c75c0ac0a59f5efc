"""
Tarefas do Celery para avaliar as cadeias de desigualdades de um ensemble
"""
import logging
from typing import Any, Dict

from celery import current_task

from opmean.utils.celery_app import celery_app

logger = logging.getLogger(__name__)


@celery_app.task(bind=True, autoretry_for=(ConnectionError,), retry_kwargs={'max_retries': 3, 'countdown': 5})
def evaluate_trial_task(self, payload: Dict[str, Any]) -> Dict[str, Any]:
    """
    Avalia uma TrialTask e devolve o resumo do caso

    Args:
        payload: TrialTask serializada (apenas ids, seeds e parametros)
    """
    from opmean.v1.bench.service import evaluate_trial_payload

    # Atualizar status da tarefa
    if current_task is not None and not self.request.is_eager:
        current_task.update_state(
            state='PROGRESS',
            meta={'status': f"Evaluating {payload.get('chain')} (trial {payload.get('trial')})"},
        )

    case = evaluate_trial_payload(payload)
    return {
        'status': 'SUCCESS',
        'index': payload['index'],
        'case': case,
    }
