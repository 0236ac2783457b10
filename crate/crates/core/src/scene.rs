pub struct Scene;
pub struct SceneContext;
