/**
 * Temporal reversal of an extraction plan: every clip keeps its identity and
 * timing but plays its frames backwards. Applying the reversal twice returns
 * the original plan.
 */

import { ClipPlan, PlanFile, VideoPlan } from './formats';

const reverseClip = (clip: ClipPlan): ClipPlan => ({
  ...clip,
  frames: [...clip.frames].reverse(),
});

const reverseVideo = (video: VideoPlan): VideoPlan => {
  const out: VideoPlan = {
    ...video,
    clips: video.clips.map(reverseClip),
  };
  if (video.views) {
    out.views = video.views.map((view) => ({
      ...view,
      clip: reverseClip(view.clip),
    }));
  }
  return out;
};

export const reversePlan = (plan: PlanFile): PlanFile => ({
  ...plan,
  videos: plan.videos.map(reverseVideo),
});
