"""벤치마크 패키지 - 데이터 생성/입출력, 섭동, 지표, 내보내기, 실험 하네스

Benchmark package: dataset generation and I/O, perturbations, metrics, exports and the
experiment harness.

Modules:
    graphs: 그래프 데이터셋, 엣지 리스트/특징 입출력, 특징 섭동
    karate: Karate 클럽 합성 데이터
    images: IDX 이미지 입출력, 다운샘플링, 픽셀 섭동
    sampling: 클래스별 잠재 통계와 노이즈 샘플링
    metrics: 엣지 P/R/F1과 pairwise-product 베이스라인
    export: 인접 행렬/이미지 그리드/CSV/곡선 내보내기
    harness: 다중 시드 실험
"""
