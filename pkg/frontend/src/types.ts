export interface ActivationSpecJson {
  kind: string;
  params: Record<string, number>;
}

export interface GraphLayer {
  id: string;
  stage: 'mapping' | 'synthesis';
  kind: 'dense' | 'conv' | 'torgb';
  base_activation: ActivationSpecJson | null;
  enabled: boolean;
  output_shape: number[];
}

export interface ParamInfo {
  name: string;
  default: number;
  soft_lo: number;
  soft_hi: number;
  integer: boolean;
}

export interface CatalogEntry {
  kind: string;
  params: ParamInfo[];
}

export interface PatchDoc {
  version: 1;
  activation_overrides: Record<string, ActivationSpecJson>;
  enable_overrides: Record<string, boolean>;
  latent_edits: Record<string, number> | number[];
  seed: number | null;
}

export interface FrameReply {
  seq: number;
  image: string; // base64 PPM or PNG payload
  format: string;
  render_ms: number;
}

export interface ErrorReply {
  seq: number | null;
  error: {
    errors: { code: string; subject: string; message: string }[];
    warnings: { code: string; subject: string; message: string }[];
  };
}

export type ServerReply = FrameReply | ErrorReply;

export function isFrame(reply: ServerReply): reply is FrameReply {
  return (reply as FrameReply).image !== undefined;
}
